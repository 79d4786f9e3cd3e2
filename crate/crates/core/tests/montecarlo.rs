mod common;

use std::collections::{HashMap, HashSet};

use common::*;
use trajlink::linking::{
    accuracy_at_k, link_all, rerank, stable_marriage, LinkConfig, LinkIndex, LinkingRun, MarriageOptions,
    SignatureModel,
};
use trajlink::privacy::{signature_closure, ClosureConfig};
use trajlink::reduction::cut_reduce;
use trajlink::signatures::{Signature, UnknownDims};
use trajlink::trace_model::{split_dataset, LocalClock, SplitStrategy, SyntheticDataset, Trace};
use trajlink::wrtree::{bulk_load, knn_search, linear_knn, IndexedObject, RtreeBaseline};

const SEEDS: u64 = 20;

struct Linked {
    query: Vec<Trace>,
    reference: Vec<Trace>,
    forward: LinkingRun,
    backward: LinkingRun,
}

fn link_both_ways(data: &SyntheticDataset, cfg: &LinkConfig) -> Linked {
    let split = split_dataset(&data.traces, SplitStrategy::Interleaved, LocalClock::default()).unwrap();
    let (query, reference) = split.for_linking();
    let h = trajlink::linking::prepare_halves(&query, &reference, &data.anchors, cfg).unwrap();
    let fwd_index = LinkIndex::build(cfg.engine, h.reference.objects.clone(), &cfg.index).unwrap();
    let forward = link_all(&h.query, &fwd_index, cfg.engine, cfg.k, cfg.m).unwrap();
    let bwd_index = LinkIndex::build(cfg.engine, h.query.objects.clone(), &cfg.index).unwrap();
    let backward = link_all(&h.reference, &bwd_index, cfg.engine, cfg.k, cfg.m).unwrap();
    Linked { query, reference, forward, backward }
}

fn large_sigs(data: &SyntheticDataset, l: &Linked, m: usize) -> (HashMap<String, Signature>, HashMap<String, Signature>) {
    let cfg = LinkConfig::default();
    let model = SignatureModel::fit(&l.reference, cfg.signature, &data.anchors, cfg.clock).unwrap();
    let conv = |traces: &[Trace], unknown| -> HashMap<String, Signature> {
        model
            .signatures(traces, unknown)
            .unwrap()
            .into_iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(id, s)| (id, cut_reduce(&s, m).unwrap()))
            .collect()
    };
    (conv(&l.query, UnknownDims::Skip), conv(&l.reference, UnknownDims::Error))
}

fn coarse() -> LinkConfig {
    LinkConfig { m: Some(3), k: 10, ..Default::default() }
}

#[test]
fn reranking_does_not_hurt_on_average() {
    let mut gains = Vec::new();
    for seed in 0..SEEDS {
        let data = small_corpus(150, 1000 + seed);
        let l = link_both_ways(&data, &coarse());
        let (qs, ds) = large_sigs(&data, &l, 100);
        let reranked = rerank(&l.forward, &qs, &ds).unwrap();
        gains.push(accuracy_at_k(&reranked, 1) - accuracy_at_k(&l.forward, 1));
        for (q, r) in &l.forward.results {
            let before: HashSet<&str> = r.ids().collect();
            let after: HashSet<&str> = reranked.results[q].ids().collect();
            assert_eq!(before, after);
        }
    }
    let g = mean(&gains);
    println!("mean rerank gain {g:.4}");
    assert!(g >= 0.0, "mean rerank gain {g}");
}

#[test]
fn stable_marriage_does_not_hurt_on_average() {
    let mut gains = Vec::new();
    for seed in 0..SEEDS {
        let data = small_corpus(150, 2000 + seed);
        let l = link_both_ways(&data, &coarse());
        let m = stable_marriage(&l.forward, &l.backward, MarriageOptions::default());
        gains.push(m.accuracy() - accuracy_at_k(&l.forward, 1));
    }
    let g = mean(&gains);
    println!("mean marriage gain {g:.4}");
    assert!(g >= 0.0, "mean marriage gain {g}");
}

#[test]
fn rerank_then_marriage_stays_injective() {
    for seed in 0..5 {
        let data = small_corpus(120, 3000 + seed);
        let l = link_both_ways(&data, &coarse());
        let (qs, ds) = large_sigs(&data, &l, 100);
        let fwd = rerank(&l.forward, &qs, &ds).unwrap();
        let bwd = rerank(&l.backward, &ds, &qs).unwrap();
        let m = stable_marriage(&fwd, &bwd, MarriageOptions::default());
        let matched: Vec<&str> = m.matched().map(|(_, d)| d).collect();
        let unique: HashSet<&str> = matched.iter().copied().collect();
        assert_eq!(matched.len(), unique.len());
    }
}

#[test]
fn closure_accuracy_falls_round_over_round() {
    let mut per_round = vec![Vec::new(); 4];
    for seed in 0..10 {
        let data = small_corpus(150, 4000 + seed);
        let cfg = ClosureConfig { m: 10, rounds: 3, ..Default::default() };
        let (_, report) = signature_closure(&data.traces, &data.anchors, &cfg).unwrap();
        for r in &report.rounds {
            per_round[r.round].push(r.acc1());
        }
    }
    let means: Vec<f64> = per_round.iter().map(|v| mean(v)).collect();
    println!("mean acc@1 by round {means:?}");
    assert!(means[1] < means[0]);
    // Strict decrease only while there is accuracy left to lose.
    for w in means[1..].windows(2) {
        assert!(w[1] < w[0] || w[0] == 0.0, "{means:?}");
    }
}

fn objects(data: &SyntheticDataset, m: Option<usize>) -> (Vec<IndexedObject>, Vec<IndexedObject>) {
    let h = halves(data, &LinkConfig { m, ..Default::default() });
    (h.query.objects, h.reference.objects)
}

fn overlap_rate(q: &[IndexedObject], d: &[IndexedObject]) -> f64 {
    let hits: usize = q.iter().map(|a| d.iter().filter(|b| a.mbr.intersects(&b.mbr)).count()).sum();
    hits as f64 / (q.len() * d.len()) as f64
}

#[test]
fn reduced_mbrs_overlap_far_less() {
    let data = clustered_corpus(300, 7);
    let (fq, fd) = objects(&data, None);
    let (rq, rd) = objects(&data, Some(3));
    let full = overlap_rate(&fq, &fd);
    let reduced = overlap_rate(&rq, &rd);
    println!("overlap full {full:.3} reduced {reduced:.3}");
    assert!(reduced < full / 2.0, "full {full} reduced {reduced}");
}

#[test]
fn rtree_baseline_agrees_with_exact_search() {
    for seed in 0..5 {
        let data = small_corpus(200, 5000 + seed);
        let (q, d) = objects(&data, Some(5));
        let tree = bulk_load(d.clone(), 16).unwrap();
        let baseline = RtreeBaseline::build(d.clone());
        for o in &q {
            let want = linear_knn(&d, &o.signature, 5);
            let got = baseline.knn(&o.signature, &o.mbr, 5);
            let tree_got = knn_search(&tree, &o.signature, &o.mbr, 5);
            let oracle: Vec<(String, f64)> = want.neighbors.iter().map(|n| (n.id.clone(), n.similarity)).collect();
            assert!(same_result(&got, &oracle, 1e-12), "{} {got:?} {want:?}", o.id);
            assert!(same_result(&tree_got, &oracle, 1e-12), "{}", o.id);
        }
    }
}

//! Refine top-k lists: re-score with larger signatures, then force a
//! one-to-one assignment with stable marriage.

use std::collections::HashMap;

use trajlink::linking::{
    accuracy_at_k, blocking_pairs, link_all, prepare_halves, rerank, stable_marriage, LinkConfig, LinkIndex,
    MarriageOptions, SignatureModel,
};
use trajlink::reduction::cut_reduce;
use trajlink::signatures::UnknownDims;
use trajlink::trace_model::{generate_synthetic, split_dataset, LocalClock, SplitStrategy, SyntheticConfig};

fn main() -> trajlink::Result<()> {
    let data = generate_synthetic(&SyntheticConfig {
        n_objects: 400,
        points_per_object: 600,
        seed: 21,
        ..Default::default()
    })?;
    let (query, reference) = split_dataset(&data.traces, SplitStrategy::Interleaved, LocalClock::default())?.for_linking();
    let cfg = LinkConfig { m: Some(5), k: 10, ..Default::default() };

    let halves = prepare_halves(&query, &reference, &data.anchors, &cfg)?;
    let forward_index = LinkIndex::build(cfg.engine, halves.reference.objects.clone(), &cfg.index)?;
    let forward = link_all(&halves.query, &forward_index, cfg.engine, cfg.k, cfg.m)?;
    let backward_index = LinkIndex::build(cfg.engine, halves.query.objects.clone(), &cfg.index)?;
    let backward = link_all(&halves.reference, &backward_index, cfg.engine, cfg.k, cfg.m)?;
    println!("m=5 acc@1 {:.3}", accuracy_at_k(&forward, 1));

    let model = SignatureModel::fit(&reference, cfg.signature, &data.anchors, cfg.clock)?;
    let large = |traces, unknown| -> trajlink::Result<HashMap<String, _>> {
        model
            .signatures(traces, unknown)?
            .into_iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(id, s)| Ok((id, cut_reduce(&s, 100)?)))
            .collect()
    };
    let reranked = rerank(
        &forward,
        &large(&query, UnknownDims::Skip)?,
        &large(&reference, UnknownDims::Error)?,
    )?;
    println!("reranked with m=100: acc@1 {:.3}", accuracy_at_k(&reranked, 1));

    let m = stable_marriage(&forward, &backward, MarriageOptions::default());
    println!(
        "stable marriage: accuracy {:.3}, {} fallbacks, {} collisions, {} blocking pairs",
        m.accuracy(),
        m.assignments.values().filter(|a| a.fallback).count(),
        m.collisions.len(),
        blocking_pairs(&m, &forward, &backward).len()
    );
    Ok(())
}

//! Brute-force oracles shared by the integration tests. None of them call
//! into the code paths they check.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajlink::linking::{Engine, LinkingRun, PreparedHalves};
use trajlink::signatures::{Signature, SignatureKind};
use trajlink::trace_model::{generate_synthetic, split_dataset, LocalClock, SplitStrategy, SyntheticConfig, SyntheticDataset};
use trajlink::wrtree::{Children, IndexedObject, KnnResult, Neighbor, NodeId, WrTree};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_map(sig: &Signature) -> HashMap<u32, f64> {
    sig.iter().collect()
}

pub fn dot_oracle(a: &Signature, b: &Signature) -> f64 {
    let bm = to_map(b);
    a.iter().map(|(d, w)| w * bm.get(&d).copied().unwrap_or(0.0)).sum()
}

/// Squared euclidean distance over the union of dims.
pub fn euclid2_oracle(a: &Signature, b: &Signature) -> f64 {
    let mut all: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for (d, w) in a.iter() {
        all.entry(d).or_default().0 = w;
    }
    for (d, w) in b.iter() {
        all.entry(d).or_default().1 = w;
    }
    all.values().map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exhaustive scan: every positive similarity, sorted by similarity
/// descending then id ascending, cut at k.
pub fn knn_oracle(objects: &[IndexedObject], query: &Signature, k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = objects
        .iter()
        .map(|o| (o.id.clone(), dot_oracle(query, &o.signature).min(1.0)))
        .filter(|(_, s)| *s > 0.0)
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Same ids in the same order, similarities within `tol`.
pub fn same_result(got: &KnnResult, want: &[(String, f64)], tol: f64) -> bool {
    got.neighbors.len() == want.len()
        && got
            .neighbors
            .iter()
            .zip(want)
            .all(|(n, (id, s))| n.id == *id && (n.similarity - s).abs() <= tol)
}

pub fn random_signature(r: &mut impl Rng, max_dim: u32, max_len: usize) -> Signature {
    let len = r.gen_range(1..=max_len);
    let entries: Vec<(u32, f64)> = (0..len).map(|_| (r.gen_range(0..max_dim), r.gen_range(0.01..1.0))).collect();
    Signature::from_entries(SignatureKind::Spatial, entries).normalized()
}

/// Object indices under `node`.
pub fn descendants(tree: &WrTree, node: NodeId) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        match &tree.node(n).children {
            Children::Objects(o) => out.extend(o.iter().copied()),
            Children::Nodes(c) => stack.extend(c.iter().copied()),
        }
    }
    out
}

/// Circular time-of-day ground distance, scaled so 12 hours cost 1.
pub fn circular_cost(i: usize, j: usize, dt_hours: f64) -> f64 {
    let gap = (i as f64 - j as f64).abs() * dt_hours;
    gap.min(24.0 - gap) / 12.0
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Earth mover's distance for histograms of `n` equal unit masses each,
/// given as bin counts: the cheapest pairing of a's units with b's units.
pub fn brute_emd(a_counts: &[usize], b_counts: &[usize], dt_hours: f64) -> f64 {
    let tokens = |c: &[usize]| -> Vec<usize> { c.iter().enumerate().flat_map(|(b, &n)| std::iter::repeat_n(b, n)).collect() };
    let (ta, tb) = (tokens(a_counts), tokens(b_counts));
    assert_eq!(ta.len(), tb.len());
    let n = ta.len();
    permutations(n)
        .iter()
        .map(|p| (0..n).map(|i| circular_cost(ta[i], tb[p[i]], dt_hours)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        / n as f64
}

/// Preference lists as indices: `q_pref[q]` ranks d's, `d_pref[d]` ranks q's.
pub struct Instance {
    pub q_pref: Vec<Vec<usize>>,
    pub d_pref: Vec<Vec<usize>>,
    /// Every pair is acceptable and both sides have the same size, so
    /// stable matchings are perfect.
    pub complete: bool,
}

impl Instance {
    fn acceptable(&self, q: usize, d: usize) -> bool {
        self.q_pref[q].contains(&d) && self.d_pref[d].contains(&q)
    }

    fn q_rank(&self, q: usize, d: usize) -> usize {
        self.q_pref[q].iter().position(|&x| x == d).unwrap()
    }

    fn d_rank(&self, d: usize, q: usize) -> usize {
        self.d_pref[d].iter().position(|&x| x == q).unwrap()
    }

    /// `m[q] = Some(d)`; checks for a mutually acceptable pair that would
    /// both rather be together.
    pub fn blocking_pairs(&self, m: &[Option<usize>]) -> Vec<(usize, usize)> {
        let mut d_partner = vec![None; self.d_pref.len()];
        for (q, d) in m.iter().enumerate() {
            if let Some(d) = d {
                d_partner[*d] = Some(q);
            }
        }
        let mut out = Vec::new();
        for (q, prefs) in self.q_pref.iter().enumerate() {
            for &d in prefs {
                if !self.acceptable(q, d) || m[q] == Some(d) {
                    continue;
                }
                let q_wants = m[q].is_none_or(|cur| self.q_rank(q, d) < self.q_rank(q, cur));
                let d_wants = d_partner[d].is_none_or(|cur| self.d_rank(d, q) < self.d_rank(d, cur));
                if q_wants && d_wants {
                    out.push((q, d));
                }
            }
        }
        out
    }

    /// Every matching over mutually acceptable pairs with no blocking pair.
    pub fn stable_matchings(&self) -> Vec<Vec<Option<usize>>> {
        fn go(inst: &Instance, q: usize, cur: &mut Vec<Option<usize>>, used: &mut Vec<bool>, out: &mut Vec<Vec<Option<usize>>>) {
            if q == inst.q_pref.len() {
                if inst.blocking_pairs(cur).is_empty() {
                    out.push(cur.clone());
                }
                return;
            }
            if !inst.complete {
                cur.push(None);
                go(inst, q + 1, cur, used, out);
                cur.pop();
            }
            for d in 0..inst.d_pref.len() {
                if !used[d] && inst.acceptable(q, d) {
                    used[d] = true;
                    cur.push(Some(d));
                    go(inst, q + 1, cur, used, out);
                    cur.pop();
                    used[d] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(self, 0, &mut Vec::new(), &mut vec![false; self.d_pref.len()], &mut out);
        out
    }

    /// The stable matching every query likes best; exists by lattice theory.
    pub fn query_optimal(&self) -> Option<Vec<Option<usize>>> {
        let all = self.stable_matchings();
        let best: Vec<Option<usize>> = (0..self.q_pref.len())
            .map(|q| {
                all.iter()
                    .filter_map(|m| m[q])
                    .min_by_key(|&d| self.q_rank(q, d))
            })
            .collect();
        all.into_iter().find(|m| *m == best)
    }

    pub fn random(r: &mut impl Rng, nq: usize, nd: usize, complete: bool) -> Self {
        use rand::seq::SliceRandom;
        let list = |r: &mut ChaCha8Rng, n: usize| {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(r);
            if !complete {
                v.truncate(r.gen_range(1..=n));
            }
            v
        };
        let mut inner = ChaCha8Rng::seed_from_u64(r.gen());
        Instance {
            q_pref: (0..nq).map(|_| list(&mut inner, nd)).collect(),
            d_pref: (0..nd).map(|_| list(&mut inner, nq)).collect(),
            complete: complete && nq == nd,
        }
    }

    /// Encodes the lists as linking runs with strictly falling similarities.
    pub fn runs(&self) -> (LinkingRun, LinkingRun) {
        let encode = |prefs: &[Vec<usize>], own: &str, other: &str| {
            let k = prefs.iter().map(Vec::len).max().unwrap_or(0);
            let mut run = LinkingRun::new(Engine::Linear, k.max(1), None);
            for (i, p) in prefs.iter().enumerate() {
                let neighbors = p
                    .iter()
                    .enumerate()
                    .map(|(r, &j)| Neighbor {
                        id: format!("{other}{j}"),
                        similarity: 1.0 - 0.01 * r as f64,
                    })
                    .collect();
                run.results.insert(format!("{own}{i}"), KnnResult { neighbors });
            }
            run
        };
        (encode(&self.q_pref, "q", "d"), encode(&self.d_pref, "d", "q"))
    }
}

/// Tuned generator settings for fast, strongly identifiable corpora.
pub fn small_corpus(n: usize, seed: u64) -> SyntheticDataset {
    generate_synthetic(&SyntheticConfig {
        n_objects: n,
        n_anchors: (n * 4).max(400),
        points_per_object: 200,
        roam_fraction: 0.3,
        roam_factor: 4.0,
        locality_radius: 0.03,
        seed,
        ..Default::default()
    })
    .unwrap()
}

/// Spatially clustered corpus used for timing: many anchors, mostly local
/// movement.
pub fn clustered_corpus(n: usize, seed: u64) -> SyntheticDataset {
    generate_synthetic(&SyntheticConfig {
        n_objects: n,
        n_anchors: 40_000,
        points_per_object: 300,
        roam_fraction: 0.5,
        locality_radius: 0.02,
        roam_factor: 3.0,
        seed,
        ..Default::default()
    })
    .unwrap()
}

pub fn halves(data: &SyntheticDataset, cfg: &trajlink::linking::LinkConfig) -> PreparedHalves {
    let split = split_dataset(&data.traces, SplitStrategy::Interleaved, LocalClock::default()).unwrap();
    let (q, d) = split.for_linking();
    trajlink::linking::prepare_halves(&q, &d, &data.anchors, cfg).unwrap()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::tree::{Children, IndexedObject, NodeId, WrTree};
use crate::reduction::Mbr;
use crate::signatures::{similarity, Signature};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: String,
    pub similarity: f64,
}

/// Top-k neighbors, similarity descending, ties by ascending id.
///
/// Only candidates with positive similarity are ever reported.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnnResult {
    pub neighbors: Vec<Neighbor>,
}

impl KnnResult {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.neighbors.iter().map(|n| n.id.as_str())
    }

    pub fn top(&self) -> Option<&Neighbor> {
        self.neighbors.first()
    }

    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.neighbors.iter().position(|n| n.id == id)
    }

    pub fn truncated(&self, k: usize) -> KnnResult {
        KnnResult {
            neighbors: self.neighbors.iter().take(k).cloned().collect(),
        }
    }
}

/// Orders (similarity desc, id asc).
pub(crate) fn rank_order(a_sim: f64, a_id: &str, b_sim: f64, b_id: &str) -> Ordering {
    b_sim.total_cmp(&a_sim).then_with(|| a_id.cmp(b_id))
}

/// Bounded top-k accumulator over object indices.
pub(crate) struct TopK<'a> {
    k: usize,
    objects: &'a [IndexedObject],
    items: Vec<(usize, f64)>,
}

impl<'a> TopK<'a> {
    pub(crate) fn new(k: usize, objects: &'a [IndexedObject]) -> Self {
        TopK {
            k,
            objects,
            items: Vec::with_capacity(k + 1),
        }
    }

    pub(crate) fn is_full(&self) -> bool {
        self.items.len() >= self.k
    }

    /// Similarity of the current k-th entry, or 0 while not full.
    pub(crate) fn threshold(&self) -> f64 {
        if self.is_full() {
            self.items[self.k - 1].1
        } else {
            0.0
        }
    }

    pub(crate) fn offer(&mut self, obj: usize, sim: f64) {
        if sim <= 0.0 || self.k == 0 {
            return;
        }
        let id = self.objects[obj].id.as_str();
        let pos = self
            .items
            .partition_point(|&(o, s)| rank_order(s, &self.objects[o].id, sim, id) == Ordering::Less);
        if pos >= self.k {
            return;
        }
        self.items.insert(pos, (obj, sim));
        self.items.truncate(self.k);
    }

    pub(crate) fn finish(self) -> KnnResult {
        KnnResult {
            neighbors: self
                .items
                .into_iter()
                .map(|(o, s)| Neighbor {
                    id: self.objects[o].id.clone(),
                    similarity: s,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Entry {
    Node(NodeId),
    Object(usize),
}

#[derive(Debug, Clone, Copy)]
struct Queued {
    score: f64,
    entry: Entry,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        let tag = |e: &Entry| match *e {
            Entry::Object(o) => (1, usize::MAX - o),
            Entry::Node(n) => (0, usize::MAX - n),
        };
        self.score
            .total_cmp(&other.score)
            .then_with(|| tag(&self.entry).cmp(&tag(&other.entry)))
    }
}

/// Work counters for one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_expanded: usize,
    pub bounds_computed: usize,
    pub similarities_computed: usize,
    pub mbr_pruned: usize,
    pub bound_pruned: usize,
}

/// Best-first k-NN over the tree with MBR-disjointness and aggregate-bound pruning.
pub fn knn_search(tree: &WrTree, query: &Signature, query_mbr: &Mbr, k: usize) -> KnnResult {
    knn_search_with_stats(tree, query, query_mbr, k).0
}

pub fn knn_search_with_stats(
    tree: &WrTree,
    query: &Signature,
    query_mbr: &Mbr,
    k: usize,
) -> (KnnResult, SearchStats) {
    let mut stats = SearchStats::default();
    let mut top = TopK::new(k, &tree.objects);
    let Some(root) = tree.root else {
        return (top.finish(), stats);
    };
    if k == 0 {
        return (top.finish(), stats);
    }
    let mut heap = BinaryHeap::new();
    heap.push(Queued {
        score: f64::INFINITY,
        entry: Entry::Node(root),
    });
    while let Some(Queued { score, entry }) = heap.pop() {
        // Popped scores never increase, so nothing left can enter the result.
        if top.is_full() && score < top.threshold() || score <= 0.0 {
            break;
        }
        match entry {
            Entry::Object(o) => top.offer(o, score),
            Entry::Node(n) => {
                stats.nodes_expanded += 1;
                let node = &tree.nodes[n];
                match &node.children {
                    Children::Objects(objs) => {
                        for &o in objs {
                            let obj = &tree.objects[o];
                            if !obj.mbr.intersects(query_mbr) {
                                stats.mbr_pruned += 1;
                                continue;
                            }
                            stats.similarities_computed += 1;
                            let s = similarity(&obj.signature, query);
                            if s > 0.0 && !(top.is_full() && s < top.threshold()) {
                                heap.push(Queued {
                                    score: s,
                                    entry: Entry::Object(o),
                                });
                            } else {
                                stats.bound_pruned += 1;
                            }
                        }
                    }
                    Children::Nodes(kids) => {
                        for &c in kids {
                            let child = &tree.nodes[c];
                            if !child.mbr.intersects(query_mbr) {
                                stats.mbr_pruned += 1;
                                continue;
                            }
                            stats.bounds_computed += 1;
                            let b = child.aggregate.dot(query);
                            if b > 0.0 && !(top.is_full() && b < top.threshold()) {
                                heap.push(Queued {
                                    score: b,
                                    entry: Entry::Node(c),
                                });
                            } else {
                                stats.bound_pruned += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    (top.finish(), stats)
}

/// Exact top-k by scanning every object.
pub fn linear_knn(objects: &[IndexedObject], query: &Signature, k: usize) -> KnnResult {
    let mut top = TopK::new(k, objects);
    for (i, o) in objects.iter().enumerate() {
        let s = similarity(&o.signature, query);
        if s > 0.0 && !(top.is_full() && s < top.threshold()) {
            top.offer(i, s);
        }
    }
    top.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::SignatureKind;
    use crate::wrtree::bulk_load;

    fn obj(id: &str, dims: &[(u32, f64)], lon: f64) -> IndexedObject {
        let s = Signature::from_entries(SignatureKind::Spatial, dims.iter().copied()).normalized();
        IndexedObject::new(id, s, Mbr::new(lon, 0.0, lon + 1.0, 1.0))
    }

    #[test]
    fn top_k_orders_ties_by_id() {
        let objs = vec![obj("b", &[(1, 1.0)], 0.0), obj("a", &[(1, 1.0)], 0.0), obj("c", &[(1, 1.0)], 0.0)];
        let mut t = TopK::new(2, &objs);
        t.offer(0, 0.5);
        t.offer(2, 0.5);
        t.offer(1, 0.5);
        let r = t.finish();
        assert_eq!(r.ids().collect::<Vec<_>>(), vec!["a", "b"]);
    }

    #[test]
    fn self_query_finds_itself() {
        let objs: Vec<IndexedObject> = (0..50)
            .map(|i| obj(&format!("o{i:02}"), &[(i, 1.0), (i + 1, 0.5)], i as f64))
            .collect();
        let tree = bulk_load(objs.clone(), 4).unwrap();
        for o in &objs {
            let r = knn_search(&tree, &o.signature, &o.mbr, 1);
            assert_eq!(r.top().unwrap().id, o.id);
            assert!((r.top().unwrap().similarity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_query_is_empty() {
        let objs: Vec<IndexedObject> = (0..20).map(|i| obj(&format!("o{i}"), &[(i, 1.0)], i as f64)).collect();
        let tree = bulk_load(objs, 4).unwrap();
        let q = Signature::from_entries(SignatureKind::Spatial, [(1000, 1.0)]).normalized();
        let r = knn_search(&tree, &q, &Mbr::new(500.0, 500.0, 501.0, 501.0), 5);
        assert!(r.is_empty());
    }

    #[test]
    fn linear_scan_edge_cases() {
        let objs = vec![obj("a", &[(1, 1.0)], 0.0), obj("b", &[(1, 0.5), (2, 0.5)], 0.0)];
        let q = objs[1].signature.clone();
        let all = linear_knn(&objs, &q, 10);
        assert_eq!(all.ids().collect::<Vec<_>>(), vec!["b", "a"]);
        let one = linear_knn(&objs[..1], &q, 3);
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn empty_tree_empty_result() {
        let tree = bulk_load(vec![], 4).unwrap();
        let q = Signature::from_entries(SignatureKind::Spatial, [(1, 1.0)]).normalized();
        assert!(knn_search(&tree, &q, &Mbr::point(0.0, 0.0), 3).is_empty());
    }

    mod props {
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        use super::*;
        use crate::wrtree::{validate, WrTree};

        /// Objects over a small dim space with dims laid out on a line, so
        /// signatures that share dims also share space.
        fn corpus(seed: u64, n: usize, dims: u32, m: usize) -> Vec<IndexedObject> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|i| {
                    let centre = rng.gen_range(0..dims);
                    let entries: Vec<(u32, f64)> = (0..m)
                        .map(|_| {
                            let d = (centre + rng.gen_range(0..12)).min(dims - 1);
                            (d, rng.gen_range(0.05..1.0))
                        })
                        .collect();
                    let s = Signature::from_entries(SignatureKind::Spatial, entries).normalized();
                    let xs = s.dims().iter().map(|&d| (d as f64, (d % 3) as f64));
                    let mbr = Mbr::from_points(xs).unwrap();
                    IndexedObject::new(format!("o{i:04}"), s, mbr)
                })
                .collect()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn bulk_tree_matches_linear(seed in any::<u64>(), n in 1usize..300, c in 2usize..12, k in 1usize..6) {
                let objs = corpus(seed, n, 200, 6);
                let tree = bulk_load(objs.clone(), c).unwrap();
                prop_assert!(validate(&tree).is_valid());
                for q in objs.iter().step_by(7) {
                    prop_assert_eq!(knn_search(&tree, &q.signature, &q.mbr, k), linear_knn(&objs, &q.signature, k));
                }
            }

            #[test]
            fn inserted_tree_matches_linear(seed in any::<u64>(), n in 1usize..300, c in 2usize..10) {
                let objs = corpus(seed, n, 150, 5);
                let mut tree = WrTree::empty(c).unwrap();
                for o in &objs {
                    tree.insert(o.clone()).unwrap();
                }
                prop_assert!(validate(&tree).is_valid());
                for q in objs.iter().step_by(5) {
                    prop_assert_eq!(knn_search(&tree, &q.signature, &q.mbr, 3), linear_knn(&objs, &q.signature, 3));
                }
            }

            #[test]
            fn node_bound_dominates_descendants(seed in any::<u64>(), n in 2usize..200) {
                let objs = corpus(seed, n, 120, 4);
                let tree = bulk_load(objs.clone(), 4).unwrap();
                let queries = corpus(seed ^ 0x5555, 5, 120, 4);
                for q in &queries {
                    for id in 0..tree.node_count() {
                        let bound = tree.node(id).aggregate.dot(&q.signature);
                        let mut stack = vec![id];
                        while let Some(x) = stack.pop() {
                            match &tree.node(x).children {
                                Children::Nodes(v) => stack.extend(v),
                                Children::Objects(v) => {
                                    for &o in v {
                                        prop_assert!(bound >= similarity(&tree.objects()[o].signature, &q.signature));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::aggregate::aggregate_signatures;
use crate::error::{Error, Result};
use crate::reduction::Mbr;
use crate::signatures::{DimId, Signature};

pub const DEFAULT_CAPACITY: usize = 32;

/// One indexed object: id, (reduced) signature and the MBR of its dims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedObject {
    pub id: String,
    pub signature: Signature,
    pub mbr: Mbr,
}

impl IndexedObject {
    pub fn new(id: impl Into<String>, signature: Signature, mbr: Mbr) -> Self {
        IndexedObject {
            id: id.into(),
            signature,
            mbr,
        }
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Children {
    /// Indices into the tree's object table.
    Objects(Vec<usize>),
    Nodes(Vec<NodeId>),
}

impl Children {
    pub fn len(&self) -> usize {
        match self {
            Children::Objects(v) => v.len(),
            Children::Nodes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Tree node: children plus the max-weight aggregate and MBR over them.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub children: Children,
    pub aggregate: Signature,
    pub mbr: Mbr,
}

/// Weighted R-tree over object signatures.
#[derive(Debug, Clone)]
pub struct WrTree {
    pub(crate) capacity: usize,
    pub(crate) objects: Vec<IndexedObject>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) root: Option<NodeId>,
    pub(crate) ids: HashMap<String, usize>,
}

impl WrTree {
    pub fn empty(capacity: usize) -> Result<Self> {
        if capacity < 2 {
            return Err(Error::param("node capacity must be at least 2"));
        }
        Ok(WrTree {
            capacity,
            objects: Vec::new(),
            nodes: Vec::new(),
            root: None,
            ids: HashMap::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[IndexedObject] {
        &self.objects
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.contains_key(id)
    }

    /// Number of node levels above the objects (0 for an empty tree).
    pub fn height(&self) -> usize {
        let mut h = 0;
        let mut cur = self.root;
        while let Some(n) = cur {
            h += 1;
            cur = match &self.nodes[n].children {
                Children::Nodes(c) => c.first().copied(),
                Children::Objects(_) => None,
            };
        }
        h
    }

    /// Nodes whose children are objects.
    pub fn leaf_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&n| matches!(self.nodes[n].children, Children::Objects(_)))
            .filter(|&n| self.is_reachable(n))
            .collect()
    }

    fn is_reachable(&self, target: NodeId) -> bool {
        let mut stack: Vec<NodeId> = self.root.into_iter().collect();
        while let Some(n) = stack.pop() {
            if n == target {
                return true;
            }
            if let Children::Nodes(c) = &self.nodes[n].children {
                stack.extend(c);
            }
        }
        false
    }

    /// Sum of stored aggregate sizes; the index's signature footprint.
    pub fn aggregate_entries(&self) -> usize {
        self.nodes.iter().map(|n| n.aggregate.len()).sum()
    }

    pub(crate) fn make_node(&mut self, children: Children) -> NodeId {
        let (aggregate, mbr) = self.summarize(&children);
        self.nodes.push(Node {
            children,
            aggregate,
            mbr,
        });
        self.nodes.len() - 1
    }

    pub(crate) fn summarize(&self, children: &Children) -> (Signature, Mbr) {
        match children {
            Children::Objects(v) => {
                let agg = aggregate_signatures(v.iter().map(|&o| &self.objects[o].signature))
                    .expect("objects share one kind");
                let mbr = v
                    .iter()
                    .map(|&o| self.objects[o].mbr)
                    .reduce(|a, b| a.union(&b))
                    .expect("non-empty node");
                (agg, mbr)
            }
            Children::Nodes(v) => {
                let agg = aggregate_signatures(v.iter().map(|&n| &self.nodes[n].aggregate))
                    .expect("nodes share one kind");
                let mbr = v
                    .iter()
                    .map(|&n| self.nodes[n].mbr)
                    .reduce(|a, b| a.union(&b))
                    .expect("non-empty node");
                (agg, mbr)
            }
        }
    }
}

/// Stamp table for O(1) membership tests over dim ids.
pub(crate) struct DimMarks {
    stamps: Vec<u32>,
    epoch: u32,
}

impl DimMarks {
    pub(crate) fn new() -> Self {
        DimMarks {
            stamps: Vec::new(),
            epoch: 1,
        }
    }

    pub(crate) fn clear(&mut self) {
        self.epoch += 1;
        if self.epoch == u32::MAX {
            self.stamps.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    pub(crate) fn mark(&mut self, dims: &[DimId]) {
        if let Some(&max) = dims.last() {
            if max as usize >= self.stamps.len() {
                self.stamps.resize(max as usize + 1, 0);
            }
        }
        for &d in dims {
            self.stamps[d as usize] = self.epoch;
        }
    }

    pub(crate) fn count(&self, dims: &[DimId]) -> usize {
        dims.iter()
            .filter(|&&d| self.stamps.get(d as usize) == Some(&self.epoch))
            .count()
    }
}

/// Greedy packing of a spatially ordered bulk into nodes of at most `c`.
///
/// Each node starts from the first unassigned item and then repeatedly takes
/// the unassigned item sharing the most dims with the node so far; ties go to
/// the earlier item. Returns groups of indices into `bulk`.
pub fn merge_node(bulk: &[&[DimId]], c: usize) -> Vec<Vec<usize>> {
    merge_node_with(bulk, c, &mut DimMarks::new())
}

pub(crate) fn merge_node_with(bulk: &[&[DimId]], c: usize, marks: &mut DimMarks) -> Vec<Vec<usize>> {
    if bulk.is_empty() {
        return Vec::new();
    }
    if bulk.len() < c {
        return vec![(0..bulk.len()).collect()];
    }
    let mut unassigned: Vec<usize> = (0..bulk.len()).collect();
    let mut groups = Vec::with_capacity(bulk.len().div_ceil(c));
    while !unassigned.is_empty() {
        let seed = unassigned.remove(0);
        let mut group = vec![seed];
        marks.clear();
        marks.mark(bulk[seed]);
        while group.len() < c && !unassigned.is_empty() {
            let mut best = (0, marks.count(bulk[unassigned[0]]));
            for (pos, &item) in unassigned.iter().enumerate().skip(1) {
                let shared = marks.count(bulk[item]);
                if shared > best.1 {
                    best = (pos, shared);
                }
            }
            let item = unassigned.remove(best.0);
            marks.mark(bulk[item]);
            group.push(item);
        }
        groups.push(group);
    }
    groups
}

/// Sort-Tile-Recursive grouping of items with the given centers.
///
/// Items are sorted by longitude, cut into `ceil(sqrt(ceil(n / c)))` slabs
/// of `slabs * c` items, each slab is sorted by latitude and packed with
/// [`merge_node`].
pub(crate) fn str_groups(
    centers: &[(f64, f64)],
    dims: &[&[DimId]],
    c: usize,
    marks: &mut DimMarks,
) -> Vec<Vec<usize>> {
    let n = centers.len();
    let leaves = n.div_ceil(c);
    let slabs = (leaves as f64).sqrt().ceil() as usize;
    let slab_len = slabs * c;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        centers[a]
            .0
            .total_cmp(&centers[b].0)
            .then(centers[a].1.total_cmp(&centers[b].1))
            .then(a.cmp(&b))
    });
    let mut out = Vec::new();
    for slab in order.chunks_mut(slab_len) {
        slab.sort_by(|&a, &b| {
            centers[a]
                .1
                .total_cmp(&centers[b].1)
                .then(centers[a].0.total_cmp(&centers[b].0))
                .then(a.cmp(&b))
        });
        let bulk: Vec<&[DimId]> = slab.iter().map(|&i| dims[i]).collect();
        for g in merge_node_with(&bulk, c, marks) {
            out.push(g.into_iter().map(|p| slab[p]).collect());
        }
    }
    out
}

/// Builds a tree bottom-up by STR tiling with signature-aware packing.
pub fn bulk_load(objects: Vec<IndexedObject>, c: usize) -> Result<WrTree> {
    let mut tree = WrTree::empty(c)?;
    for (i, o) in objects.iter().enumerate() {
        if tree.ids.insert(o.id.clone(), i).is_some() {
            return Err(Error::DuplicateId(o.id.clone()));
        }
        if o.signature.kind() != objects[0].signature.kind() {
            return Err(Error::KindMismatch(
                objects[0].signature.kind().to_string(),
                o.signature.kind().to_string(),
            ));
        }
    }
    tree.objects = objects;
    if tree.objects.is_empty() {
        return Ok(tree);
    }
    let mut marks = DimMarks::new();

    let n = tree.objects.len();
    if n <= c {
        let root = tree.make_node(Children::Objects((0..n).collect()));
        tree.root = Some(root);
        return Ok(tree);
    }

    let centers: Vec<(f64, f64)> = tree.objects.iter().map(|o| o.mbr.center()).collect();
    let dims: Vec<&[DimId]> = tree.objects.iter().map(|o| o.signature.dims()).collect();
    let groups = str_groups(&centers, &dims, c, &mut marks);
    let mut level: Vec<NodeId> = groups
        .into_iter()
        .map(|g| tree.make_node(Children::Objects(g)))
        .collect();

    while level.len() > c {
        let centers: Vec<(f64, f64)> = level.iter().map(|&n| tree.nodes[n].mbr.center()).collect();
        let groups = {
            let dims: Vec<&[DimId]> = level.iter().map(|&n| tree.nodes[n].aggregate.dims()).collect();
            str_groups(&centers, &dims, c, &mut marks)
        };
        level = groups
            .into_iter()
            .map(|g| {
                let children = g.into_iter().map(|i| level[i]).collect();
                tree.make_node(Children::Nodes(children))
            })
            .collect();
    }
    let root = if level.len() == 1 {
        level[0]
    } else {
        tree.make_node(Children::Nodes(level))
    };
    tree.root = Some(root);
    Ok(tree)
}

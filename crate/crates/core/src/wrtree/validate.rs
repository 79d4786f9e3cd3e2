use std::fmt;

use serde::Serialize;

use super::tree::{Children, NodeId, WrTree};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    ChildCount { node: NodeId, count: usize },
    Aggregate { node: NodeId },
    Containment { node: NodeId },
    Depth { node: NodeId, depth: usize, expected: usize },
    ObjectCoverage { object: usize, seen: usize },
    NodeReuse { node: NodeId },
    IdTable,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ChildCount { node, count } => write!(f, "node {node} has {count} children"),
            Violation::Aggregate { node } => write!(f, "node {node} aggregate is not the dim-wise max of its children"),
            Violation::Containment { node } => write!(f, "node {node} mbr does not cover its children"),
            Violation::Depth { node, depth, expected } => {
                write!(f, "leaf node {node} at depth {depth}, expected {expected}")
            }
            Violation::ObjectCoverage { object, seen } => write!(f, "object {object} reachable {seen} times"),
            Violation::NodeReuse { node } => write!(f, "node {node} reachable more than once"),
            Violation::IdTable => write!(f, "id table does not match the object list"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub objects: usize,
    pub nodes: usize,
    pub height: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Full structural check: child counts, exact aggregates, MBR containment,
/// equal leaf depth and one path to every object.
pub fn validate(tree: &WrTree) -> ValidationReport {
    let mut violations = Vec::new();
    let mut object_seen = vec![0usize; tree.objects.len()];
    let mut node_seen = vec![false; tree.nodes.len()];
    let mut leaf_depth: Option<usize> = None;

    if tree.ids.len() != tree.objects.len()
        || tree.objects.iter().enumerate().any(|(i, o)| tree.ids.get(&o.id) != Some(&i))
    {
        violations.push(Violation::IdTable);
    }

    let mut stack: Vec<(NodeId, usize)> = tree.root.map(|r| (r, 1)).into_iter().collect();
    while let Some((n, depth)) = stack.pop() {
        if std::mem::replace(&mut node_seen[n], true) {
            violations.push(Violation::NodeReuse { node: n });
            continue;
        }
        let node = &tree.nodes[n];
        let count = node.children.len();
        if count == 0 || count > tree.capacity {
            violations.push(Violation::ChildCount { node: n, count });
        }
        if count == 0 {
            continue;
        }
        let (agg, mbr) = tree.summarize(&node.children);
        if agg != node.aggregate {
            violations.push(Violation::Aggregate { node: n });
        }
        if !node.mbr.contains(&mbr) {
            violations.push(Violation::Containment { node: n });
        }
        match &node.children {
            Children::Objects(v) => {
                for &o in v {
                    object_seen[o] += 1;
                }
                match leaf_depth {
                    None => leaf_depth = Some(depth),
                    Some(d) if d != depth => violations.push(Violation::Depth {
                        node: n,
                        depth,
                        expected: d,
                    }),
                    _ => {}
                }
            }
            Children::Nodes(v) => stack.extend(v.iter().rev().map(|&c| (c, depth + 1))),
        }
    }
    for (object, &seen) in object_seen.iter().enumerate() {
        if seen != 1 {
            violations.push(Violation::ObjectCoverage { object, seen });
        }
    }
    ValidationReport {
        objects: tree.objects.len(),
        nodes: node_seen.iter().filter(|&&s| s).count(),
        height: leaf_depth.unwrap_or(0),
        violations,
    }
}

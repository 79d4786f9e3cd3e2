use super::aggregate::absorb;
use super::tree::{Children, IndexedObject, NodeId, WrTree};
use crate::error::{Error, Result};
use crate::reduction::Mbr;

impl WrTree {
    /// Adds one object, descending to the most attractive leaf and splitting
    /// overflowing nodes on the way back up.
    pub fn insert(&mut self, object: IndexedObject) -> Result<()> {
        if self.ids.contains_key(&object.id) {
            return Err(Error::DuplicateId(object.id));
        }
        if let Some(first) = self.objects.first() {
            if first.signature.kind() != object.signature.kind() {
                return Err(Error::KindMismatch(
                    first.signature.kind().to_string(),
                    object.signature.kind().to_string(),
                ));
            }
        }
        let idx = self.objects.len();
        self.ids.insert(object.id.clone(), idx);
        self.objects.push(object);

        let Some(root) = self.root else {
            let root = self.make_node(Children::Objects(vec![idx]));
            self.root = Some(root);
            return Ok(());
        };

        let mut path = vec![root];
        loop {
            let node = *path.last().unwrap();
            match &self.nodes[node].children {
                Children::Objects(_) => break,
                Children::Nodes(kids) => {
                    let next = self.choose_subtree(kids, idx);
                    path.push(next);
                }
            }
        }

        for &n in &path {
            let (sig, mbr) = (&self.objects[idx].signature, self.objects[idx].mbr);
            let node = &mut self.nodes[n];
            absorb(&mut node.aggregate, sig);
            node.mbr = node.mbr.union(&mbr);
        }
        let leaf = *path.last().unwrap();
        if let Children::Objects(v) = &mut self.nodes[leaf].children {
            v.push(idx);
        }

        // Split upward while nodes overflow.
        let mut level = path.len() - 1;
        loop {
            let node = path[level];
            if self.nodes[node].children.len() <= self.capacity {
                break;
            }
            let sibling = self.split_node(node);
            if level == 0 {
                let new_root = self.make_node(Children::Nodes(vec![node, sibling]));
                self.root = Some(new_root);
                break;
            }
            let parent = path[level - 1];
            if let Children::Nodes(v) = &mut self.nodes[parent].children {
                v.push(sibling);
            }
            level -= 1;
        }
        Ok(())
    }

    /// Max shared dims, then least area enlargement, then least overlap
    /// enlargement, then lowest position.
    fn choose_subtree(&self, kids: &[NodeId], obj: usize) -> NodeId {
        let o = &self.objects[obj];
        let keyed: Vec<(usize, f64)> = kids
            .iter()
            .map(|&c| {
                let n = &self.nodes[c];
                (n.aggregate.shared_dims(&o.signature), n.mbr.enlargement(&o.mbr))
            })
            .collect();
        let best_shared = keyed.iter().map(|k| k.0).max().unwrap_or(0);
        let tied: Vec<usize> = (0..kids.len()).filter(|&i| keyed[i].0 == best_shared).collect();
        let best_enl = tied.iter().map(|&i| keyed[i].1).fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = tied.into_iter().filter(|&i| keyed[i].1 == best_enl).collect();
        if tied.len() == 1 {
            return kids[tied[0]];
        }
        let overlap_growth = |i: usize| {
            let cur = self.nodes[kids[i]].mbr;
            let grown = cur.union(&o.mbr);
            kids.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &s)| {
                    let sib = &self.nodes[s].mbr;
                    grown.intersection_area(sib) - cur.intersection_area(sib)
                })
                .sum::<f64>()
        };
        let mut best = (tied[0], overlap_growth(tied[0]));
        for &i in &tied[1..] {
            let g = overlap_growth(i);
            if g < best.1 {
                best = (i, g);
            }
        }
        kids[best.0]
    }

    /// Splits an overflowing node in place; returns the new sibling.
    fn split_node(&mut self, node: NodeId) -> NodeId {
        let children = std::mem::replace(&mut self.nodes[node].children, Children::Objects(Vec::new()));
        let (keep, moved) = match children {
            Children::Objects(v) => {
                let mbrs: Vec<Mbr> = v.iter().map(|&o| self.objects[o].mbr).collect();
                let (a, b) = quadratic_split(&mbrs, self.capacity);
                (
                    Children::Objects(a.iter().map(|&i| v[i]).collect()),
                    Children::Objects(b.iter().map(|&i| v[i]).collect()),
                )
            }
            Children::Nodes(v) => {
                let mbrs: Vec<Mbr> = v.iter().map(|&n| self.nodes[n].mbr).collect();
                let (a, b) = quadratic_split(&mbrs, self.capacity);
                (
                    Children::Nodes(a.iter().map(|&i| v[i]).collect()),
                    Children::Nodes(b.iter().map(|&i| v[i]).collect()),
                )
            }
        };
        let (agg, mbr) = self.summarize(&keep);
        let n = &mut self.nodes[node];
        n.children = keep;
        n.aggregate = agg;
        n.mbr = mbr;
        self.make_node(moved)
    }
}

/// Guttman's quadratic split of `c + 1` rectangles into two groups, each
/// holding at least 40% of `c` entries.
pub(crate) fn quadratic_split(mbrs: &[Mbr], c: usize) -> (Vec<usize>, Vec<usize>) {
    let n = mbrs.len();
    let min_fill = ((c * 2).div_ceil(5)).max(1).min(n / 2);
    let mut seeds = (0, 1);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let d = mbrs[i].union(&mbrs[j]).area() - mbrs[i].area() - mbrs[j].area();
            if d > worst {
                worst = d;
                seeds = (i, j);
            }
        }
    }
    let mut groups = (vec![seeds.0], vec![seeds.1]);
    let mut boxes = (mbrs[seeds.0], mbrs[seeds.1]);
    let mut rest: Vec<usize> = (0..n).filter(|&i| i != seeds.0 && i != seeds.1).collect();
    while !rest.is_empty() {
        if groups.0.len() + rest.len() <= min_fill {
            groups.0.append(&mut rest);
            break;
        }
        if groups.1.len() + rest.len() <= min_fill {
            groups.1.append(&mut rest);
            break;
        }
        let mut pick = (0, f64::NEG_INFINITY);
        for (pos, &i) in rest.iter().enumerate() {
            let diff = (boxes.0.enlargement(&mbrs[i]) - boxes.1.enlargement(&mbrs[i])).abs();
            if diff > pick.1 {
                pick = (pos, diff);
            }
        }
        let i = rest.remove(pick.0);
        let (e0, e1) = (boxes.0.enlargement(&mbrs[i]), boxes.1.enlargement(&mbrs[i]));
        let to_first = if e0 != e1 {
            e0 < e1
        } else if boxes.0.area() != boxes.1.area() {
            boxes.0.area() < boxes.1.area()
        } else {
            groups.0.len() <= groups.1.len()
        };
        if to_first {
            groups.0.push(i);
            boxes.0 = boxes.0.union(&mbrs[i]);
        } else {
            groups.1.push(i);
            boxes.1 = boxes.1.union(&mbrs[i]);
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::{Signature, SignatureKind};
    use crate::wrtree::{knn_search, validate};

    fn obj(i: u32) -> IndexedObject {
        let s = Signature::from_entries(SignatureKind::Spatial, [(i, 1.0), (i % 7 + 1000, 0.3)]).normalized();
        let x = (i as f64 * 0.37).sin() * 10.0;
        let y = (i as f64 * 0.91).cos() * 10.0;
        IndexedObject::new(format!("o{i}"), s, Mbr::new(x, y, x + 0.5, y + 0.5))
    }

    #[test]
    fn insert_into_empty_tree() {
        let mut t = WrTree::empty(4).unwrap();
        t.insert(obj(1)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.height(), 1);
        let r = knn_search(&t, &t.objects()[0].signature, &t.objects()[0].mbr, 1);
        assert_eq!(r.top().unwrap().id, "o1");
        assert!((r.top().unwrap().similarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_id_rejected() {
        let mut t = WrTree::empty(4).unwrap();
        t.insert(obj(1)).unwrap();
        assert!(matches!(t.insert(obj(1)), Err(Error::DuplicateId(_))));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn splits_keep_invariants() {
        let mut t = WrTree::empty(4).unwrap();
        for i in 0..200 {
            t.insert(obj(i)).unwrap();
            let report = validate(&t);
            assert!(report.is_valid(), "after {i}: {:?}", report.violations);
        }
        assert!(t.height() >= 3);
        for o in t.objects().to_vec() {
            let r = knn_search(&t, &o.signature, &o.mbr, 1);
            assert_eq!(r.top().unwrap().id, o.id);
        }
    }

    #[test]
    fn quadratic_split_respects_min_fill() {
        let mut mbrs: Vec<Mbr> = (0..8).map(|i| Mbr::point(i as f64, 0.0)).collect();
        mbrs.push(Mbr::point(1000.0, 1000.0));
        let (a, b) = quadratic_split(&mbrs, 8);
        assert_eq!(a.len() + b.len(), 9);
        assert!(a.len() >= 4 && b.len() >= 4, "{a:?} {b:?}");
    }
}

use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};

use super::search::{KnnResult, TopK};
use super::tree::IndexedObject;
use crate::reduction::Mbr;
use crate::signatures::{similarity, Signature};

type Entry = GeomWithData<Rectangle<[f64; 2]>, usize>;

fn envelope(m: &Mbr) -> AABB<[f64; 2]> {
    AABB::from_corners([m.min_lon, m.min_lat], [m.max_lon, m.max_lat])
}

/// Plain R-tree over object MBRs: range query, then cosine on the survivors.
pub struct RtreeBaseline {
    objects: Vec<IndexedObject>,
    tree: RTree<Entry>,
}

impl RtreeBaseline {
    pub fn build(objects: Vec<IndexedObject>) -> Self {
        let entries = objects
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let e = envelope(&o.mbr);
                GeomWithData::new(Rectangle::from_corners(e.lower(), e.upper()), i)
            })
            .collect();
        RtreeBaseline {
            objects,
            tree: RTree::bulk_load(entries),
        }
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

    pub fn knn(&self, query: &Signature, query_mbr: &Mbr, k: usize) -> KnnResult {
        let mut top = TopK::new(k, &self.objects);
        for e in self.tree.locate_in_envelope_intersecting(&envelope(query_mbr)) {
            let s = similarity(&self.objects[e.data].signature, query);
            top.offer(e.data, s);
        }
        top.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::SignatureKind;
    use crate::wrtree::linear_knn;

    fn obj(id: &str, d: u32, m: Mbr) -> IndexedObject {
        let s = Signature::from_entries(SignatureKind::Spatial, [(d, 1.0), (99, 0.5)]).normalized();
        IndexedObject::new(id, s, m)
    }

    #[test]
    fn no_overlap_is_empty() {
        let b = RtreeBaseline::build(vec![obj("a", 1, Mbr::point(0.0, 0.0))]);
        let q = Signature::from_entries(SignatureKind::Spatial, [(99, 1.0)]).normalized();
        assert!(b.knn(&q, &Mbr::point(5.0, 5.0), 3).is_empty());
    }

    #[test]
    fn full_overlap_equals_linear() {
        let objs: Vec<IndexedObject> = (0..30)
            .map(|i| obj(&format!("o{i}"), i % 5, Mbr::new(0.0, 0.0, 1.0 + i as f64, 1.0)))
            .collect();
        let b = RtreeBaseline::build(objs.clone());
        let q = objs[3].signature.clone();
        assert_eq!(b.knn(&q, &Mbr::new(0.5, 0.5, 0.6, 0.6), 7), linear_knn(&objs, &q, 7));
    }

    #[test]
    fn touching_edges_overlap() {
        let b = RtreeBaseline::build(vec![obj("a", 1, Mbr::new(0.0, 0.0, 1.0, 1.0))]);
        let q = Signature::from_entries(SignatureKind::Spatial, [(1, 1.0)]).normalized();
        assert_eq!(b.knn(&q, &Mbr::new(1.0, 1.0, 2.0, 2.0), 1).len(), 1);
    }
}

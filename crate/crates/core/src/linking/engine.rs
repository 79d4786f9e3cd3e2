use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduction::{LshPlanes, LshSketch};
use crate::signatures::SignatureKind;
use crate::wrtree::{bulk_load, knn_search, linear_knn, IndexedObject, KnnResult, Neighbor, RtreeBaseline, WrTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Linear,
    Rtree,
    Wrtree,
    Lsh,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::Linear, Engine::Rtree, Engine::Wrtree, Engine::Lsh];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Linear => "linear",
            Engine::Rtree => "rtree",
            Engine::Wrtree => "wrtree",
            Engine::Lsh => "lsh",
        }
    }

    /// Whether results are guaranteed identical to the linear scan.
    pub fn is_exact(self) -> bool {
        matches!(self, Engine::Linear | Engine::Wrtree)
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "linear" => Ok(Engine::Linear),
            "rtree" | "rtreebaseline" => Ok(Engine::Rtree),
            "wrtree" => Ok(Engine::Wrtree),
            "lsh" => Ok(Engine::Lsh),
            _ => Err(Error::param(format!(
                "unknown engine '{s}' (expected linear, rtree, wrtree or lsh)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    pub capacity: usize,
    pub lsh_planes: usize,
    pub lsh_seed: u64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            capacity: crate::wrtree::DEFAULT_CAPACITY,
            lsh_planes: 64,
            lsh_seed: 0,
        }
    }
}

pub struct LshIndex {
    planes: LshPlanes,
    objects: Vec<IndexedObject>,
    sketches: Vec<LshSketch>,
}

impl LshIndex {
    pub fn build(objects: Vec<IndexedObject>, planes: LshPlanes) -> Self {
        use rayon::prelude::*;
        let sketches = objects.par_iter().map(|o| planes.sketch(&o.signature)).collect();
        LshIndex {
            planes,
            objects,
            sketches,
        }
    }

    /// Ranks by sketch Hamming distance; reported similarity is the cosine
    /// estimate, and only positive estimates are kept.
    pub fn knn(&self, query: &IndexedObject, k: usize) -> KnnResult {
        let qs = self.planes.sketch(&query.signature);
        let mut scored: Vec<(u32, usize)> = self
            .sketches
            .iter()
            .enumerate()
            .map(|(i, s)| (s.hamming(&qs), i))
            .filter(|&(h, _)| 2 * (h as usize) < self.planes.n_planes)
            .collect();
        scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| self.objects[a.1].id.cmp(&self.objects[b.1].id)));
        KnnResult {
            neighbors: scored
                .into_iter()
                .take(k)
                .map(|(_, i)| Neighbor {
                    id: self.objects[i].id.clone(),
                    similarity: self.sketches[i].estimate_cosine(&qs),
                })
                .collect(),
        }
    }
}

/// A reference dataset prepared for one engine.
pub enum LinkIndex {
    Linear(Vec<IndexedObject>),
    Rtree(RtreeBaseline),
    Wrtree(WrTree),
    Lsh(LshIndex),
}

impl LinkIndex {
    pub fn build(engine: Engine, objects: Vec<IndexedObject>, opts: &IndexOptions) -> Result<Self> {
        Ok(match engine {
            Engine::Linear => LinkIndex::Linear(objects),
            Engine::Rtree => LinkIndex::Rtree(RtreeBaseline::build(objects)),
            Engine::Wrtree => LinkIndex::Wrtree(bulk_load(objects, opts.capacity)?),
            Engine::Lsh => {
                if opts.lsh_planes == 0 {
                    return Err(Error::param("lsh needs at least one plane"));
                }
                LinkIndex::Lsh(LshIndex::build(objects, LshPlanes::new(opts.lsh_seed, opts.lsh_planes)))
            }
        })
    }

    pub fn engine(&self) -> Engine {
        match self {
            LinkIndex::Linear(_) => Engine::Linear,
            LinkIndex::Rtree(_) => Engine::Rtree,
            LinkIndex::Wrtree(_) => Engine::Wrtree,
            LinkIndex::Lsh(_) => Engine::Lsh,
        }
    }

    pub fn objects(&self) -> &[IndexedObject] {
        match self {
            LinkIndex::Linear(v) => v,
            LinkIndex::Rtree(b) => b.objects(),
            LinkIndex::Wrtree(t) => t.objects(),
            LinkIndex::Lsh(l) => &l.objects,
        }
    }

    pub fn len(&self) -> usize {
        self.objects().len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects().is_empty()
    }

    pub fn kind(&self) -> Option<SignatureKind> {
        self.objects().first().map(|o| o.signature.kind())
    }

    pub fn knn(&self, query: &IndexedObject, k: usize) -> KnnResult {
        match self {
            LinkIndex::Linear(v) => linear_knn(v, &query.signature, k),
            LinkIndex::Rtree(b) => b.knn(&query.signature, &query.mbr, k),
            LinkIndex::Wrtree(t) => knn_search(t, &query.signature, &query.mbr, k),
            LinkIndex::Lsh(l) => l.knn(query, k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::Mbr;
    use crate::signatures::Signature;

    #[test]
    fn parse_engine_names() {
        assert_eq!("WR-tree".parse::<Engine>().unwrap(), Engine::Wrtree);
        assert_eq!("rtree_baseline".parse::<Engine>().unwrap(), Engine::Rtree);
        assert!("kd".parse::<Engine>().is_err());
        for e in Engine::ALL {
            assert_eq!(e.name().parse::<Engine>().unwrap(), e);
        }
    }

    #[test]
    fn lsh_finds_identical_vector() {
        let objs: Vec<IndexedObject> = (0..20u32)
            .map(|i| {
                let s = Signature::from_entries(SignatureKind::Spatial, [(i, 1.0), (i + 1, 0.7), (i + 5, 0.2)])
                    .normalized();
                IndexedObject::new(format!("o{i:02}"), s, Mbr::point(0.0, 0.0))
            })
            .collect();
        let idx = LinkIndex::build(Engine::Lsh, objs.clone(), &IndexOptions { lsh_planes: 256, ..Default::default() })
            .unwrap();
        let r = idx.knn(&objs[7], 1);
        assert_eq!(r.top().unwrap().id, "o07");
        assert_eq!(r.top().unwrap().similarity, 1.0);
    }
}

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};

use super::geo::{unit_vector, DistanceMetric};
use crate::error::{Error, Result};

pub type AnchorId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub anchor_id: AnchorId,
    pub lon: f64,
    pub lat: f64,
}

enum Lookup {
    Sphere(RTree<GeomWithData<[f64; 3], AnchorId>>),
    Plane(RTree<GeomWithData<[f64; 2], AnchorId>>),
}

/// Immutable vocabulary of snapping locations, indexed for nearest lookup.
///
/// Ids are dense in `[0, len)`; `anchors[i].anchor_id == i`.
pub struct AnchorSet {
    anchors: Vec<Anchor>,
    metric: DistanceMetric,
    lookup: Lookup,
}

impl std::fmt::Debug for AnchorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnchorSet")
            .field("len", &self.anchors.len())
            .field("metric", &self.metric)
            .finish()
    }
}

impl Clone for AnchorSet {
    fn clone(&self) -> Self {
        AnchorSet::with_metric(self.anchors.clone(), self.metric).expect("valid anchors")
    }
}

// Relative slack under which two candidate distances count as a tie.
const TIE_EPS: f64 = 1e-9;

impl AnchorSet {
    pub fn new(anchors: Vec<Anchor>) -> Result<Self> {
        Self::with_metric(anchors, DistanceMetric::Haversine)
    }

    pub fn with_metric(mut anchors: Vec<Anchor>, metric: DistanceMetric) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::NoAnchors);
        }
        anchors.sort_by_key(|a| a.anchor_id);
        for (i, a) in anchors.iter().enumerate() {
            if a.anchor_id as usize != i {
                return Err(Error::param(format!(
                    "anchor ids must be unique and dense in [0, {}); found {} at position {}",
                    anchors.len(),
                    a.anchor_id,
                    i
                )));
            }
            check_coords(a.lon, a.lat)?;
        }
        let lookup = match metric {
            DistanceMetric::Haversine => Lookup::Sphere(RTree::bulk_load(
                anchors
                    .iter()
                    .map(|a| GeomWithData::new(unit_vector(a.lon, a.lat), a.anchor_id))
                    .collect(),
            )),
            DistanceMetric::Planar => Lookup::Plane(RTree::bulk_load(
                anchors
                    .iter()
                    .map(|a| GeomWithData::new([a.lon, a.lat], a.anchor_id))
                    .collect(),
            )),
        };
        Ok(AnchorSet {
            anchors,
            metric,
            lookup,
        })
    }

    /// Builds a set from bare coordinates, assigning ids by position.
    pub fn from_coords(coords: &[(f64, f64)], metric: DistanceMetric) -> Result<Self> {
        let anchors = coords
            .iter()
            .enumerate()
            .map(|(i, &(lon, lat))| Anchor {
                anchor_id: i as AnchorId,
                lon,
                lat,
            })
            .collect();
        Self::with_metric(anchors, metric)
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn get(&self, id: AnchorId) -> Option<&Anchor> {
        self.anchors.get(id as usize)
    }

    pub fn coords(&self, id: AnchorId) -> Option<(f64, f64)> {
        self.get(id).map(|a| (a.lon, a.lat))
    }

    /// Bounding box `(min_lon, min_lat, max_lon, max_lat)` of all anchors.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.anchors.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), x| (a.min(x.lon), b.min(x.lat), c.max(x.lon), d.max(x.lat)),
        )
    }

    pub fn mean_lat(&self) -> f64 {
        self.anchors.iter().map(|a| a.lat).sum::<f64>() / self.anchors.len() as f64
    }

    /// Nearest anchor under the set's metric; ties go to the lowest id.
    pub fn nearest(&self, lon: f64, lat: f64) -> AnchorId {
        // Candidates arrive in ascending index distance; collect everything
        // within tie slack of the first and settle it with the true metric.
        let mut candidates: Vec<AnchorId> = Vec::new();
        match &self.lookup {
            Lookup::Sphere(tree) => {
                let q = unit_vector(lon, lat);
                let mut best = None;
                for (g, d2) in tree.nearest_neighbor_iter_with_distance_2(&q) {
                    let d = d2.sqrt();
                    match best {
                        None => best = Some(d),
                        Some(b) if d > b + TIE_EPS * b.max(1e-12) + 1e-15 => break,
                        _ => {}
                    }
                    candidates.push(g.data);
                }
            }
            Lookup::Plane(tree) => {
                let q = [lon, lat];
                let mut best = None;
                for (g, d2) in tree.nearest_neighbor_iter_with_distance_2(&q) {
                    let d = d2.sqrt();
                    match best {
                        None => best = Some(d),
                        Some(b) if d > b + TIE_EPS * b.max(1e-12) + 1e-15 => break,
                        _ => {}
                    }
                    candidates.push(g.data);
                }
            }
        }
        if candidates.len() == 1 {
            return candidates[0];
        }
        let dists: Vec<(AnchorId, f64)> = candidates
            .into_iter()
            .map(|id| {
                let a = &self.anchors[id as usize];
                (id, self.metric.distance(lon, lat, a.lon, a.lat))
            })
            .collect();
        let min = dists.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
        dists
            .iter()
            .filter(|d| d.1 <= min + TIE_EPS * min.max(1e-12) + 1e-12)
            .map(|d| d.0)
            .min()
            .expect("at least one candidate")
    }
}

pub(crate) fn check_coords(lon: f64, lat: f64) -> Result<()> {
    if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
        return Err(Error::param(format!(
            "coordinate out of range: lon={lon}, lat={lat}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_nearest(set: &AnchorSet, lon: f64, lat: f64) -> AnchorId {
        let mut best = (f64::INFINITY, 0);
        for a in set.anchors() {
            let d = set.metric().distance(lon, lat, a.lon, a.lat);
            if d < best.0 - 1e-12 {
                best = (d, a.anchor_id);
            }
        }
        best.1
    }

    #[test]
    fn rejects_empty_and_sparse_ids() {
        assert!(matches!(AnchorSet::new(vec![]), Err(Error::NoAnchors)));
        let bad = vec![Anchor {
            anchor_id: 1,
            lon: 0.0,
            lat: 0.0,
        }];
        assert!(AnchorSet::new(bad).is_err());
    }

    #[test]
    fn equidistant_point_snaps_to_lower_id() {
        let coords = vec![(0.0, 0.0), (5.0, 5.0), (2.0, 0.0)];
        for metric in [DistanceMetric::Haversine, DistanceMetric::Planar] {
            let set = AnchorSet::from_coords(&coords, metric).unwrap();
            assert_eq!(set.nearest(1.0, 0.0), 0);
        }
        let coords = vec![(2.0, 0.0), (0.0, 0.0)];
        let set = AnchorSet::from_coords(&coords, DistanceMetric::Haversine).unwrap();
        assert_eq!(set.nearest(1.0, 0.0), 0);
    }

    #[test]
    fn nearest_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let coords: Vec<(f64, f64)> = (0..500)
            .map(|_| (rng.gen_range(116.0..117.0), rng.gen_range(39.5..40.5)))
            .collect();
        for metric in [DistanceMetric::Haversine, DistanceMetric::Planar] {
            let set = AnchorSet::from_coords(&coords, metric).unwrap();
            for _ in 0..300 {
                let (lon, lat) = (rng.gen_range(115.9..117.1), rng.gen_range(39.4..40.6));
                assert_eq!(set.nearest(lon, lat), brute_nearest(&set, lon, lat));
            }
        }
    }
}

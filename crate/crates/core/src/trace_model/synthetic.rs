//! Seeded workload generator with planted per-object locality.
//!
//! Objects live in the unit square (mapped onto a lon/lat box). Each object
//! has a home; a share of its visits hits anchors inside a small locality
//! disc around the home with Zipf-distributed revisit frequencies, and the
//! rest roams uniformly over a wider disc. Both discs scale with
//! `locality_radius`, so a zero radius pins every object to one anchor.
//! The defaults roam over the whole map and keep about 7% of visits local,
//! spread over roughly thirty anchors.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anchors::{Anchor, AnchorId, AnchorSet};
use super::geo::{DistanceMetric, SECONDS_PER_DAY};
use super::trace::{RawPoint, Trace, TracePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_objects: usize,
    pub n_anchors: usize,
    /// Radius of the locality disc in unit-square units.
    pub locality_radius: f64,
    pub points_per_object: usize,
    pub seed: u64,
    /// Roaming disc radius as a multiple of `locality_radius`.
    pub roam_factor: f64,
    /// Share of visits drawn uniformly from the roaming disc.
    pub roam_fraction: f64,
    /// Exponent of the Zipf revisit law over an object's local anchors.
    pub zipf_exponent: f64,
    pub days: u32,
    /// Epoch second of the first day's local midnight.
    pub start: i64,
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_objects: 500,
            n_anchors: 6000,
            locality_radius: 0.04,
            points_per_object: 3000,
            seed: 0,
            roam_factor: 30.0,
            roam_fraction: 0.93,
            zipf_exponent: 0.3,
            days: 30,
            // 2008-02-02 00:00 at UTC+8.
            start: 1_201_881_600,
            min_lon: 116.0,
            min_lat: 39.6,
            max_lon: 116.8,
            max_lat: 40.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub traces: Vec<Trace>,
    pub anchors: AnchorSet,
    /// Home of each object in unit-square coordinates, parallel to `traces`.
    pub homes: Vec<(f64, f64)>,
}

struct UnitGrid {
    cell: f64,
    side: usize,
    buckets: Vec<Vec<usize>>,
}

impl UnitGrid {
    fn new(points: &[(f64, f64)], cell: f64) -> Self {
        let cell = cell.clamp(1e-3, 1.0);
        let side = (1.0 / cell).ceil() as usize;
        let mut buckets = vec![Vec::new(); side * side];
        for (i, &(x, y)) in points.iter().enumerate() {
            buckets[Self::idx(x, cell, side) + side * Self::idx(y, cell, side)].push(i);
        }
        UnitGrid {
            cell,
            side,
            buckets,
        }
    }

    fn idx(v: f64, cell: f64, side: usize) -> usize {
        ((v / cell) as usize).min(side - 1)
    }

    /// Indices within `radius` of `(x, y)`, ascending.
    fn within(&self, points: &[(f64, f64)], x: f64, y: f64, radius: f64) -> Vec<usize> {
        let span = (radius / self.cell).ceil() as isize + 1;
        let (cx, cy) = (
            Self::idx(x, self.cell, self.side) as isize,
            Self::idx(y, self.cell, self.side) as isize,
        );
        let mut out = Vec::new();
        for gy in (cy - span).max(0)..=(cy + span).min(self.side as isize - 1) {
            for gx in (cx - span).max(0)..=(cx + span).min(self.side as isize - 1) {
                for &i in &self.buckets[gx as usize + self.side * gy as usize] {
                    let (px, py) = points[i];
                    if (px - x).powi(2) + (py - y).powi(2) <= radius * radius {
                        out.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticDataset> {
    if cfg.n_anchors < 1 {
        return Err(Error::param("n_anchors must be at least 1"));
    }
    if cfg.n_objects < 1 || cfg.points_per_object < 1 || cfg.days < 1 {
        return Err(Error::param(
            "n_objects, points_per_object and days must be at least 1",
        ));
    }
    if !(0.0..=1.0).contains(&cfg.roam_fraction) || cfg.locality_radius < 0.0 {
        return Err(Error::param(
            "roam_fraction must be in [0, 1] and locality_radius non-negative",
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let unit: Vec<(f64, f64)> = (0..cfg.n_anchors)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let homes: Vec<(f64, f64)> = (0..cfg.n_objects)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();

    let (wlon, wlat) = (cfg.max_lon - cfg.min_lon, cfg.max_lat - cfg.min_lat);
    let anchors: Vec<Anchor> = unit
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| Anchor {
            anchor_id: i as AnchorId,
            lon: cfg.min_lon + x * wlon,
            lat: cfg.min_lat + y * wlat,
        })
        .collect();
    let anchor_set = AnchorSet::with_metric(anchors, DistanceMetric::Haversine)?;

    let roam_radius = cfg.locality_radius * cfg.roam_factor.max(1.0);
    let grid = UnitGrid::new(&unit, roam_radius.max(cfg.locality_radius));

    let traces: Vec<Trace> = homes
        .par_iter()
        .enumerate()
        .map(|(obj, &(hx, hy))| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(obj as u64 + 1);

            let mut local = grid.within(&unit, hx, hy, cfg.locality_radius);
            if local.is_empty() {
                local.push(nearest_unit(&unit, hx, hy));
            }
            local.shuffle(&mut rng);
            let zipf: Vec<f64> = (0..local.len())
                .map(|r| 1.0 / ((r + 1) as f64).powf(cfg.zipf_exponent))
                .collect();
            let local_dist = WeightedIndex::new(&zipf).expect("non-empty positive weights");
            let roam = grid.within(&unit, hx, hy, roam_radius);

            let peaks = [rng.gen_range(0.0..24.0), rng.gen_range(0.0..24.0)];
            let mut times: Vec<i64> = (0..cfg.points_per_object)
                .map(|_| {
                    let day = rng.gen_range(0..cfg.days) as i64;
                    let peak = peaks[rng.gen_range(0..2)];
                    let hour = (peak + 2.0 * standard_normal(&mut rng)).rem_euclid(24.0);
                    cfg.start + day * SECONDS_PER_DAY + (hour * 3600.0) as i64
                })
                .collect();
            times.sort_unstable();

            let mut points: Vec<TracePoint> = Vec::with_capacity(times.len());
            for t in times {
                let mut pick = || {
                    if !roam.is_empty() && rng.gen::<f64>() < cfg.roam_fraction {
                        roam[rng.gen_range(0..roam.len())]
                    } else {
                        local[local_dist.sample(&mut rng)]
                    }
                };
                let prev = points.last().map(|p| p.anchor);
                let mut anchor = pick() as AnchorId;
                for _ in 0..8 {
                    if Some(anchor) != prev {
                        break;
                    }
                    anchor = pick() as AnchorId;
                }
                if Some(anchor) != prev {
                    points.push(TracePoint { anchor, t });
                }
            }
            Trace::new(format!("o{obj:06}"), points)
        })
        .collect();

    Ok(SyntheticDataset {
        traces,
        anchors: anchor_set,
        homes,
    })
}

fn nearest_unit(points: &[(f64, f64)], x: f64, y: f64) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, &(px, py)) in points.iter().enumerate() {
        let d = (px - x).powi(2) + (py - y).powi(2);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Scatters each visit of `trace` around its anchor with up to `jitter_deg`
/// of uniform noise per axis, yielding raw points for ingestion.
pub fn to_raw_points(trace: &Trace, anchors: &AnchorSet, jitter_deg: f64, seed: u64) -> Vec<RawPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    trace
        .points
        .iter()
        .map(|p| {
            let (lon, lat) = anchors.coords(p.anchor).expect("anchor in set");
            let (dx, dy) = if jitter_deg > 0.0 {
                (
                    rng.gen_range(-jitter_deg..=jitter_deg),
                    rng.gen_range(-jitter_deg..=jitter_deg),
                )
            } else {
                (0.0, 0.0)
            };
            RawPoint::new(lon + dx, lat + dy, p.t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn small() -> SyntheticConfig {
        SyntheticConfig {
            n_objects: 40,
            n_anchors: 400,
            points_per_object: 200,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_same_traces() {
        let a = generate_synthetic(&small()).unwrap();
        let b = generate_synthetic(&small()).unwrap();
        assert_eq!(a.traces, b.traces);
        let c = generate_synthetic(&SyntheticConfig { seed: 10, ..small() }).unwrap();
        assert_ne!(a.traces, c.traces);
    }

    #[test]
    fn zero_radius_pins_each_object() {
        let cfg = SyntheticConfig {
            locality_radius: 0.0,
            ..small()
        };
        let ds = generate_synthetic(&cfg).unwrap();
        for t in &ds.traces {
            let distinct: HashSet<_> = t.anchors().collect();
            assert_eq!(distinct.len(), 1);
        }
    }

    #[test]
    fn traces_sorted_without_consecutive_repeats() {
        let ds = generate_synthetic(&small()).unwrap();
        for t in &ds.traces {
            assert!(!t.is_empty());
            assert!(t.points.windows(2).all(|w| w[0].t <= w[1].t && w[0].anchor != w[1].anchor));
        }
    }

    #[test]
    fn rejects_zero_anchors() {
        let cfg = SyntheticConfig {
            n_anchors: 0,
            ..small()
        };
        assert!(generate_synthetic(&cfg).is_err());
    }

    #[test]
    fn raw_points_recalibrate_to_same_trace() {
        let ds = generate_synthetic(&small()).unwrap();
        let t = &ds.traces[0];
        let raw = to_raw_points(t, &ds.anchors, 0.0, 1);
        let back = crate::trace_model::calibrate_trace(t.object_id.clone(), &raw, &ds.anchors).unwrap();
        assert_eq!(&back, t);
    }
}

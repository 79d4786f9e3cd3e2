use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduction::Mbr;
use crate::trace_model::geo::meters_to_degrees;
use crate::trace_model::{AnchorSet, Trace};

/// Mean per-object ratios between a modified dataset and the original.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityMetrics {
    pub data_remain: f64,
    pub mbr_overlap: f64,
    pub grid_coverage_large: f64,
    pub grid_coverage_small: f64,
}

/// Grid cell edges in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityGrids {
    pub large_m: f64,
    pub small_m: f64,
}

impl Default for UtilityGrids {
    fn default() -> Self {
        UtilityGrids {
            large_m: 423.0,
            small_m: 85.0,
        }
    }
}

struct Footprint {
    points: usize,
    mbr: Option<Mbr>,
    large: HashSet<(i64, i64)>,
    small: HashSet<(i64, i64)>,
}

fn footprint(t: &Trace, anchors: &AnchorSet, large: (f64, f64), small: (f64, f64)) -> Result<Footprint> {
    let coords = t
        .points
        .iter()
        .map(|p| {
            anchors
                .coords(p.anchor)
                .ok_or_else(|| Error::param(format!("anchor {} not in anchor set", p.anchor)))
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = |(dlon, dlat): (f64, f64)| {
        coords
            .iter()
            .map(|&(lon, lat)| ((lon / dlon).floor() as i64, (lat / dlat).floor() as i64))
            .collect()
    };
    Ok(Footprint {
        points: t.len(),
        mbr: Mbr::from_points(coords.iter().copied()),
        large: cells(large),
        small: cells(small),
    })
}

fn ratio(after: usize, before: usize) -> f64 {
    if before == 0 {
        1.0
    } else {
        after as f64 / before as f64
    }
}

fn mbr_overlap(before: Option<Mbr>, after: Option<Mbr>) -> f64 {
    match (before, after) {
        (None, _) => 1.0,
        (Some(_), None) => 0.0,
        (Some(b), Some(a)) => {
            if b.area() > 0.0 {
                b.intersection_area(&a) / b.area()
            } else if b.contains(&a) {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Compares `after` against `before` object by object; both must hold the
/// same object ids.
pub fn utility_metrics(before: &[Trace], after: &[Trace], anchors: &AnchorSet, grids: UtilityGrids) -> Result<UtilityMetrics> {
    if grids.large_m <= 0.0 || grids.small_m <= 0.0 {
        return Err(Error::param("grid cell sizes must be positive"));
    }
    let after_by_id: HashMap<&str, &Trace> = after.iter().map(|t| (t.object_id.as_str(), t)).collect();
    if after_by_id.len() != after.len() || after.len() != before.len() {
        return Err(Error::param("before and after must hold the same objects"));
    }
    if before.is_empty() {
        return Ok(UtilityMetrics {
            data_remain: 1.0,
            mbr_overlap: 1.0,
            grid_coverage_large: 1.0,
            grid_coverage_small: 1.0,
        });
    }
    let lat = anchors.mean_lat();
    let large = meters_to_degrees(grids.large_m, lat);
    let small = meters_to_degrees(grids.small_m, lat);
    let mut sums = [0.0; 4];
    for b in before {
        let a = after_by_id
            .get(b.object_id.as_str())
            .ok_or_else(|| Error::MissingObject(b.object_id.clone()))?;
        let fb = footprint(b, anchors, large, small)?;
        let fa = footprint(a, anchors, large, small)?;
        sums[0] += ratio(fa.points, fb.points);
        sums[1] += mbr_overlap(fb.mbr, fa.mbr);
        sums[2] += ratio(fa.large.intersection(&fb.large).count(), fb.large.len());
        sums[3] += ratio(fa.small.intersection(&fb.small).count(), fb.small.len());
    }
    let n = before.len() as f64;
    Ok(UtilityMetrics {
        data_remain: sums[0] / n,
        mbr_overlap: sums[1] / n,
        grid_coverage_large: sums[2] / n,
        grid_coverage_small: sums[3] / n,
    })
}

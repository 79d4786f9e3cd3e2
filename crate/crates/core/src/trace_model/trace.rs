use serde::{Deserialize, Serialize};

use super::anchors::{check_coords, AnchorId, AnchorSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawPoint {
    pub lon: f64,
    pub lat: f64,
    /// Epoch seconds, UTC.
    pub t: i64,
}

impl RawPoint {
    pub fn new(lon: f64, lat: f64, t: i64) -> Self {
        RawPoint { lon, lat, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TracePoint {
    pub anchor: AnchorId,
    pub t: i64,
}

/// Chronologically ordered anchor visits of one object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub object_id: String,
    pub points: Vec<TracePoint>,
}

impl Trace {
    pub fn new(object_id: impl Into<String>, points: Vec<TracePoint>) -> Self {
        Trace {
            object_id: object_id.into(),
            points,
        }
    }

    /// Builds a trace from `(anchor, t)` pairs.
    pub fn from_pairs(object_id: impl Into<String>, pairs: &[(AnchorId, i64)]) -> Self {
        Trace::new(
            object_id,
            pairs
                .iter()
                .map(|&(anchor, t)| TracePoint { anchor, t })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn anchors(&self) -> impl Iterator<Item = AnchorId> + '_ {
        self.points.iter().map(|p| p.anchor)
    }
}

/// Snaps raw GPS points to their nearest anchors and collapses consecutive
/// repeats of one anchor into its earliest visit.
pub fn calibrate_trace(
    object_id: impl Into<String>,
    raw: &[RawPoint],
    anchors: &AnchorSet,
) -> Result<Trace> {
    if raw.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut sorted = raw.to_vec();
    sorted.sort_by_key(|p| p.t);
    let mut points: Vec<TracePoint> = Vec::with_capacity(sorted.len());
    for p in &sorted {
        check_coords(p.lon, p.lat)?;
        if p.t < 0 {
            return Err(Error::param(format!("negative timestamp {}", p.t)));
        }
        let anchor = anchors.nearest(p.lon, p.lat);
        if points.last().map(|l| l.anchor) != Some(anchor) {
            points.push(TracePoint { anchor, t: p.t });
        }
    }
    Ok(Trace::new(object_id, points))
}

/// Keeps traces with at least `min_points` points, preserving order.
pub fn filter_min_points(traces: Vec<Trace>, min_points: usize) -> Vec<Trace> {
    traces
        .into_iter()
        .filter(|t| t.len() >= min_points)
        .collect()
}

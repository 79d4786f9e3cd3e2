use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signatures::{Signature, SignatureKind};
use crate::trace_model::AnchorSet;

/// Closed axis-aligned rectangle in lon/lat degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mbr {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl Mbr {
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Self {
        debug_assert!(min_lon <= max_lon && min_lat <= max_lat);
        Mbr {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        }
    }

    pub fn point(lon: f64, lat: f64) -> Self {
        Mbr::new(lon, lat, lon, lat)
    }

    /// Tight box around a set of coordinates; `None` when empty.
    pub fn from_points(points: impl IntoIterator<Item = (f64, f64)>) -> Option<Self> {
        let mut it = points.into_iter();
        let (lon, lat) = it.next()?;
        Some(it.fold(Mbr::point(lon, lat), |m, (lon, lat)| {
            m.union(&Mbr::point(lon, lat))
        }))
    }

    pub fn union(&self, other: &Mbr) -> Mbr {
        Mbr {
            min_lon: self.min_lon.min(other.min_lon),
            min_lat: self.min_lat.min(other.min_lat),
            max_lon: self.max_lon.max(other.max_lon),
            max_lat: self.max_lat.max(other.max_lat),
        }
    }

    /// Touching edges count as intersecting.
    #[inline]
    pub fn intersects(&self, other: &Mbr) -> bool {
        self.min_lon <= other.max_lon
            && other.min_lon <= self.max_lon
            && self.min_lat <= other.max_lat
            && other.min_lat <= self.max_lat
    }

    pub fn intersection(&self, other: &Mbr) -> Option<Mbr> {
        self.intersects(other).then(|| Mbr {
            min_lon: self.min_lon.max(other.min_lon),
            min_lat: self.min_lat.max(other.min_lat),
            max_lon: self.max_lon.min(other.max_lon),
            max_lat: self.max_lat.min(other.max_lat),
        })
    }

    pub fn contains(&self, other: &Mbr) -> bool {
        self.min_lon <= other.min_lon
            && self.min_lat <= other.min_lat
            && self.max_lon >= other.max_lon
            && self.max_lat >= other.max_lat
    }

    pub fn area(&self) -> f64 {
        (self.max_lon - self.min_lon) * (self.max_lat - self.min_lat)
    }

    pub fn intersection_area(&self, other: &Mbr) -> f64 {
        self.intersection(other).map_or(0.0, |m| m.area())
    }

    pub fn enlargement(&self, other: &Mbr) -> f64 {
        self.union(other).area() - self.area()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.min_lon + self.max_lon) / 2.0,
            (self.min_lat + self.max_lat) / 2.0,
        )
    }
}

/// Bounding box of the anchor locations a spatial signature covers.
pub fn mbr_of(sig: &Signature, anchors: &AnchorSet) -> Result<Mbr> {
    if sig.kind() != SignatureKind::Spatial {
        return Err(Error::KindMismatch(
            sig.kind().to_string(),
            SignatureKind::Spatial.to_string(),
        ));
    }
    if sig.is_empty() {
        return Err(Error::EmptySignature("cannot bound an empty signature".into()));
    }
    let coords = sig
        .dims()
        .iter()
        .map(|&d| {
            anchors
                .coords(d)
                .ok_or_else(|| Error::param(format!("dimension {d} is not a known anchor")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Mbr::from_points(coords).expect("non-empty"))
}

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type DimId = u32;

pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SignatureKind {
    Spatial,
    Sequential { q: u32 },
    /// `grid` cells per axis, `bins` time intervals per day.
    Spatiotemporal { grid: u32, bins: u32 },
}

impl fmt::Display for SignatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureKind::Spatial => write!(f, "spatial"),
            SignatureKind::Sequential { q } => write!(f, "sequential(q={q})"),
            SignatureKind::Spatiotemporal { grid, bins } => {
                write!(f, "spatiotemporal(grid={grid}, bins={bins})")
            }
        }
    }
}

/// Sparse non-negative weight vector with strictly increasing dimension ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    kind: SignatureKind,
    dims: Vec<DimId>,
    weights: Vec<f64>,
    normalized: bool,
}

impl Signature {
    pub fn empty(kind: SignatureKind) -> Self {
        Signature {
            kind,
            dims: Vec::new(),
            weights: Vec::new(),
            normalized: false,
        }
    }

    /// Builds an unnormalized signature; entries may come in any order,
    /// repeated dims are summed and non-positive weights are dropped.
    pub fn from_entries(kind: SignatureKind, entries: impl IntoIterator<Item = (DimId, f64)>) -> Self {
        let mut e: Vec<(DimId, f64)> = entries.into_iter().collect();
        e.sort_by_key(|x| x.0);
        let mut dims = Vec::with_capacity(e.len());
        let mut weights: Vec<f64> = Vec::with_capacity(e.len());
        for (d, w) in e {
            if dims.last() == Some(&d) {
                *weights.last_mut().unwrap() += w;
            } else {
                dims.push(d);
                weights.push(w);
            }
        }
        let mut s = Signature {
            kind,
            dims,
            weights,
            normalized: false,
        };
        s.drop_non_positive();
        s
    }

    /// Wraps already sorted parallel vectors.
    pub(crate) fn from_sorted_unchecked(
        kind: SignatureKind,
        dims: Vec<DimId>,
        weights: Vec<f64>,
        normalized: bool,
    ) -> Self {
        debug_assert!(dims.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(dims.len(), weights.len());
        Signature {
            kind,
            dims,
            weights,
            normalized,
        }
    }

    fn drop_non_positive(&mut self) {
        if self.weights.iter().all(|&w| w > 0.0) {
            return;
        }
        let (dims, weights): (Vec<_>, Vec<_>) = self
            .dims
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&d, &w)| (d, w))
            .unzip();
        self.dims = dims;
        self.weights = weights;
    }

    /// L2-normalizes in place; empty signatures stay empty and unnormalized.
    pub fn normalize(&mut self) {
        let norm = self.l2_norm();
        if norm > 0.0 {
            for w in &mut self.weights {
                *w /= norm;
            }
            self.drop_non_positive();
            self.normalized = !self.dims.is_empty();
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn kind(&self) -> SignatureKind {
        self.kind
    }

    pub fn dims(&self) -> &[DimId] {
        &self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DimId, f64)> + '_ {
        self.dims.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn get(&self, dim: DimId) -> Option<f64> {
        self.dims.binary_search(&dim).ok().map(|i| self.weights[i])
    }

    pub fn contains(&self, dim: DimId) -> bool {
        self.dims.binary_search(&dim).is_ok()
    }

    pub fn l2_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Merge-join dot product over shared dims, summed in ascending dim order.
    pub fn dot(&self, other: &Signature) -> f64 {
        sparse_dot(&self.dims, &self.weights, &other.dims, &other.weights)
    }

    /// Number of dims of `other` that also appear here.
    pub fn shared_dims(&self, other: &Signature) -> usize {
        count_shared(&self.dims, &other.dims)
    }

    pub(crate) fn into_parts(self) -> (SignatureKind, Vec<DimId>, Vec<f64>, bool) {
        (self.kind, self.dims, self.weights, self.normalized)
    }
}

pub(crate) fn sparse_dot(ad: &[DimId], aw: &[f64], bd: &[DimId], bw: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    while i < ad.len() && j < bd.len() {
        match ad[i].cmp(&bd[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += aw[i] * bw[j];
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

pub(crate) fn count_shared(a: &[DimId], b: &[DimId]) -> usize {
    // Binary search the longer side when sizes are lopsided.
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if small.len() * 8 < large.len() {
        return small.iter().filter(|d| large.binary_search(d).is_ok()).count();
    }
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < small.len() && j < large.len() {
        match small[i].cmp(&large[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Similarity of two unit signatures without validation, clamped to `[0, 1]`.
#[inline]
pub fn similarity(a: &Signature, b: &Signature) -> f64 {
    a.dot(b).clamp(0.0, 1.0)
}

/// Cosine similarity of two L2-normalized signatures of the same kind.
pub fn cosine_similarity(a: &Signature, b: &Signature) -> Result<f64> {
    if a.kind != b.kind {
        return Err(Error::KindMismatch(a.kind.to_string(), b.kind.to_string()));
    }
    for s in [a, b] {
        if !s.normalized || (s.l2_norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized);
        }
    }
    Ok(similarity(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(entries: &[(DimId, f64)]) -> Signature {
        Signature::from_entries(SignatureKind::Spatial, entries.iter().copied())
    }

    #[test]
    fn from_entries_sorts_merges_and_drops_zero() {
        let s = sig(&[(5, 1.0), (2, 0.0), (1, 2.0), (5, 0.5)]);
        assert_eq!(s.dims(), &[1, 5]);
        assert_eq!(s.weights(), &[2.0, 1.5]);
        assert!(!s.is_normalized());
    }

    #[test]
    fn hand_computed_cosine() {
        let a = sig(&[(0, 0.6), (1, 0.8)]).normalized();
        let b = sig(&[(0, 0.8), (1, 0.6)]).normalized();
        assert!((cosine_similarity(&a, &b).unwrap() - 0.96).abs() < 1e-12);
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_is_zero() {
        let a = sig(&[(0, 1.0)]).normalized();
        let b = sig(&[(1, 1.0)]).normalized();
        assert_eq!(cosine_similarity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn rejects_unnormalized_and_mismatched() {
        let a = sig(&[(0, 2.0)]);
        let b = sig(&[(0, 1.0)]).normalized();
        assert!(matches!(cosine_similarity(&a, &b), Err(Error::NotNormalized)));
        let c = Signature::from_entries(SignatureKind::Sequential { q: 2 }, [(0, 1.0)]).normalized();
        assert!(matches!(cosine_similarity(&b, &c), Err(Error::KindMismatch(..))));
    }

    #[test]
    fn shared_dims_both_paths() {
        let a: Vec<DimId> = (0..100).collect();
        assert_eq!(count_shared(&[3, 50, 200], &a), 2);
        assert_eq!(count_shared(&[1, 2, 3], &[2, 3, 4]), 2);
    }

    #[test]
    fn empty_stays_unnormalized() {
        let s = Signature::empty(SignatureKind::Spatial).normalized();
        assert!(s.is_empty());
        assert!(!s.is_normalized());
    }
}

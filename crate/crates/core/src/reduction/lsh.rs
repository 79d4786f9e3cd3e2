//! Sign-random-projection sketches for cosine similarity.
//!
//! Plane coordinates are never materialized: coordinate `(plane, dim)` is a
//! standard normal derived by hashing `(seed, plane, dim)`, so the same
//! planes are reproduced for any dimension vocabulary and from any thread.

use serde::{Deserialize, Serialize};

use crate::signatures::Signature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LshPlanes {
    pub seed: u64,
    pub n_planes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LshSketch {
    bits: Vec<u64>,
    n_planes: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_open(x: u64) -> f64 {
    // 53 random bits mapped into (0, 1).
    ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

impl LshPlanes {
    pub fn new(seed: u64, n_planes: usize) -> Self {
        LshPlanes { seed, n_planes }
    }

    /// Standard normal coordinate of `plane` along `dim` (Box-Muller).
    pub fn coordinate(&self, plane: usize, dim: u64) -> f64 {
        let key = splitmix64(self.seed ^ splitmix64(plane as u64 ^ splitmix64(dim)));
        let u1 = unit_open(splitmix64(key));
        let u2 = unit_open(splitmix64(key ^ 0xD1B5_4A32_D192_ED03));
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn sketch_entries(&self, entries: &[(u64, f64)]) -> LshSketch {
        let mut bits = vec![0u64; self.n_planes.div_ceil(64)];
        for plane in 0..self.n_planes {
            let dot: f64 = entries
                .iter()
                .map(|&(d, w)| w * self.coordinate(plane, d))
                .sum();
            if dot >= 0.0 {
                bits[plane / 64] |= 1 << (plane % 64);
            }
        }
        LshSketch {
            bits,
            n_planes: self.n_planes,
        }
    }

    pub fn sketch(&self, sig: &Signature) -> LshSketch {
        let e: Vec<(u64, f64)> = sig.iter().map(|(d, w)| (d as u64, w)).collect();
        self.sketch_entries(&e)
    }

    /// Sketch of a dense vector whose i-th entry lives on dim `i`.
    pub fn sketch_dense(&self, v: &[f64]) -> LshSketch {
        let e: Vec<(u64, f64)> = v.iter().enumerate().map(|(i, &w)| (i as u64, w)).collect();
        self.sketch_entries(&e)
    }
}

/// Sketches a signature; same as [`LshPlanes::sketch`].
pub fn lsh_sketch(sig: &Signature, planes: &LshPlanes) -> LshSketch {
    planes.sketch(sig)
}

impl LshSketch {
    pub fn n_planes(&self) -> usize {
        self.n_planes
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn hamming(&self, other: &LshSketch) -> u32 {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// Cosine estimate `cos(pi * hamming / n_planes)`.
    pub fn estimate_cosine(&self, other: &LshSketch) -> f64 {
        let frac = self.hamming(other) as f64 / self.n_planes as f64;
        (std::f64::consts::PI * frac).cos()
    }
}

//! Linking moving objects across trajectory datasets.
//!
//! Traces are snapped to anchor locations, turned into TF-IDF weighted
//! movement signatures, reduced to their top-weighted dimensions and indexed
//! in a weighted R-tree whose internal nodes carry per-dimension maximum
//! weights. k-nearest-neighbor search over that tree prunes by spatial
//! overlap and by a signature-similarity upper bound, and returns exactly
//! what a linear scan would.

pub mod cli;
pub mod error;
pub mod linking;
pub mod privacy;
pub mod reduction;
pub mod signatures;
pub mod trace_model;
pub mod wrtree;

pub use error::{Error, Result};

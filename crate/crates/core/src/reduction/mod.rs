//! Signature reduction (CUT, LSH sketches) and spatial bounding.

mod cut;
mod lsh;
mod mbr;

pub use cut::{cut_reduce, cut_reduce_with};
pub use lsh::{lsh_sketch, LshPlanes, LshSketch};
pub use mbr::{mbr_of, Mbr};

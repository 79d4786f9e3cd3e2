//! Weighted R-tree: an R-tree whose nodes also carry the dim-wise maximum of
//! the signatures below them, so a single dot product bounds the similarity
//! of any descendant.

mod aggregate;
mod baseline;
pub mod codec;
mod insert;
mod search;
mod tree;
mod validate;

pub use aggregate::aggregate_signatures;
pub use baseline::RtreeBaseline;
pub use codec::{load_index, read_index, save_index, write_index};
pub use search::{knn_search, knn_search_with_stats, linear_knn, KnnResult, Neighbor, SearchStats};
pub use tree::{bulk_load, merge_node, Children, IndexedObject, Node, NodeId, WrTree, DEFAULT_CAPACITY};
pub use validate::{validate, ValidationReport, Violation};

//! Movement signatures and their similarities.

mod corpus;
mod emd;
pub mod io;
mod signature;
mod temporal;
mod tfidf;

pub use corpus::{build_corpus_stats, CorpusStats};
pub use emd::transport_cost;
pub use signature::{cosine_similarity, similarity, DimId, Signature, SignatureKind, NORM_TOL};
pub use temporal::{
    bins_for, build_temporal_histogram, cost_matrix, emd, emd_similarity, temporal_cost,
    TemporalHistogram,
};
pub use tfidf::{
    build_cell_corpus, build_gram_corpus, build_sequential_signature,
    build_sequential_signature_with, build_spatial_signature, build_spatial_signature_with,
    build_spatiotemporal_signature, tfidf_signature, CellMapper, GramCorpus, GramVocabulary,
    GridSpec, UnknownDims,
};

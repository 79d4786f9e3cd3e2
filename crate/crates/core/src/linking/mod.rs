//! Batch linking of query objects against a reference dataset, scoring, and
//! the two refinements: re-ranking and stable marriage.

mod engine;
mod marriage;
mod pipeline;
mod prepare;
mod rerank;
mod run;

pub use engine::{Engine, IndexOptions, LinkIndex, LshIndex};
pub use marriage::{blocking_pairs, stable_marriage, Assignment, Marriage, MarriageOptions};
pub use pipeline::{link_traces, prepare_halves, LinkConfig, PreparedHalves};
pub use prepare::{prepare_objects, ObjectSet, SignatureModel, SignatureSpec, Support};
pub use rerank::rerank;
pub use run::{
    accuracy_at_k, accuracy_curve, link_all, read_results, write_results, LinkingRun, Metrics, Timings,
};

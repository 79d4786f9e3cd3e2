//! Signature closure: repeatedly deleting each object's most identifying
//! points, and measuring how much of the data survives.

mod closure;
mod utility;

pub use closure::{
    closure_link_config, signature_closure, suppress_round, ClosureConfig, ClosureReport, ClosureRound,
};
pub use utility::{utility_metrics, UtilityGrids, UtilityMetrics};

//! Trace ingestion: anchor snapping, filtering, day-based splitting and a
//! synthetic workload generator.

mod anchors;
pub mod geo;
pub mod io;
mod split;
mod synthetic;
mod trace;

pub use anchors::{Anchor, AnchorId, AnchorSet};
pub use geo::{DistanceMetric, LocalClock};
pub use split::{split_dataset, SplitOutput, SplitStrategy, SplitWarning};
pub use synthetic::{generate_synthetic, to_raw_points, SyntheticConfig, SyntheticDataset};
pub use trace::{calibrate_trace, filter_min_points, RawPoint, Trace, TracePoint};

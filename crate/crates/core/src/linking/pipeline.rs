use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::engine::{Engine, IndexOptions, LinkIndex};
use super::prepare::{prepare_objects, ObjectSet, SignatureModel, SignatureSpec};
use super::run::{link_all, LinkingRun};
use crate::error::Result;
use crate::signatures::UnknownDims;
use crate::trace_model::{AnchorSet, LocalClock, Trace};

/// Everything needed to go from two halves of traces to a linking run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub signature: SignatureSpec,
    /// CUT size; `None` keeps full signatures.
    pub m: Option<usize>,
    pub renormalize: bool,
    pub engine: Engine,
    pub k: usize,
    pub index: IndexOptions,
    pub clock: LocalClock,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            signature: SignatureSpec::Spatial,
            m: Some(10),
            renormalize: true,
            engine: Engine::Wrtree,
            k: 5,
            index: IndexOptions::default(),
            clock: LocalClock::default(),
        }
    }
}

/// Prepared reference and query sides, before any index is built.
pub struct PreparedHalves {
    pub query: ObjectSet,
    pub reference: ObjectSet,
    pub signature_secs: f64,
}

/// Fits corpus statistics on the reference half and builds reduced objects
/// for both halves. Query dims unseen in the reference are dropped.
pub fn prepare_halves(
    query: &[Trace],
    reference: &[Trace],
    anchors: &AnchorSet,
    cfg: &LinkConfig,
) -> Result<PreparedHalves> {
    let start = Instant::now();
    let model = SignatureModel::fit(reference, cfg.signature, anchors, cfg.clock)?;
    let d = prepare_objects(model.signatures(reference, UnknownDims::Error)?, cfg.m, cfg.renormalize, &model.support())?;
    let q = prepare_objects(model.signatures(query, UnknownDims::Skip)?, cfg.m, cfg.renormalize, &model.support())?;
    Ok(PreparedHalves {
        query: q,
        reference: d,
        signature_secs: start.elapsed().as_secs_f64(),
    })
}

/// Signatures, reduction, index build and batch k-NN in one go.
pub fn link_traces(query: &[Trace], reference: &[Trace], anchors: &AnchorSet, cfg: &LinkConfig) -> Result<LinkingRun> {
    let halves = prepare_halves(query, reference, anchors, cfg)?;
    let start = Instant::now();
    let index = LinkIndex::build(cfg.engine, halves.reference.objects, &cfg.index)?;
    let build_secs = start.elapsed().as_secs_f64();
    let mut run = link_all(&halves.query, &index, cfg.engine, cfg.k, cfg.m)?;
    run.timings.build_secs = build_secs;
    Ok(run)
}

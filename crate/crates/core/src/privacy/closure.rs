use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::utility::{utility_metrics, UtilityGrids, UtilityMetrics};
use crate::error::{Error, Result};
use crate::linking::{accuracy_curve, link_traces, LinkConfig, SignatureSpec};
use crate::reduction::cut_reduce;
use crate::signatures::{build_corpus_stats, build_spatial_signature};
use crate::trace_model::{split_dataset, AnchorId, AnchorSet, SplitStrategy, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureConfig {
    /// Points suppressed per object per round.
    pub m: usize,
    pub rounds: usize,
    pub split: SplitStrategy,
    /// How accuracy is measured after each round.
    pub link: LinkConfig,
    pub grids: UtilityGrids,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        ClosureConfig {
            m: 10,
            rounds: 5,
            split: SplitStrategy::Interleaved,
            link: LinkConfig::default(),
            grids: UtilityGrids::default(),
        }
    }
}

/// State after one round; round 0 is the untouched data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureRound {
    pub round: usize,
    /// Acc@1..=k.
    pub accuracy: BTreeMap<usize, f64>,
    pub utility: UtilityMetrics,
    pub points_removed: usize,
    /// Objects whose trace is now empty.
    pub emptied: Vec<String>,
}

impl ClosureRound {
    pub fn acc1(&self) -> f64 {
        self.accuracy.get(&1).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub rounds: Vec<ClosureRound>,
    /// Per object, the anchors suppressed in each round (index 0 = round 1).
    pub removed: BTreeMap<String, Vec<Vec<AnchorId>>>,
}

/// One suppression step: each object's top-`m` spatial signature anchors,
/// weighted against the current corpus, are deleted from its trace.
pub fn suppress_round(traces: &[Trace], m: usize) -> Result<(Vec<Trace>, Vec<Vec<AnchorId>>)> {
    let stats = build_corpus_stats(traces);
    traces
        .par_iter()
        .map(|t| {
            if t.is_empty() {
                return Ok((t.clone(), Vec::new()));
            }
            let sig = cut_reduce(&build_spatial_signature(t, &stats)?, m)?;
            let drop: HashSet<AnchorId> = sig.dims().iter().copied().collect();
            let kept = t.points.iter().filter(|p| !drop.contains(&p.anchor)).copied().collect();
            Ok((Trace::new(t.object_id.clone(), kept), sig.dims().to_vec()))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().unzip())
}

fn evaluate(original: &[Trace], current: &[Trace], anchors: &AnchorSet, cfg: &ClosureConfig) -> Result<(BTreeMap<usize, f64>, UtilityMetrics)> {
    let split = split_dataset(current, cfg.split, cfg.link.clock)?;
    let (query, reference) = split.for_linking();
    let run = link_traces(&query, &reference, anchors, &cfg.link)?;
    let utility = utility_metrics(original, current, anchors, cfg.grids)?;
    Ok((accuracy_curve(&run, cfg.link.k), utility))
}

/// Iteratively suppresses each object's most identifying points and records
/// linking accuracy and data utility after every round.
///
/// Suppression applies to whole traces, so both halves of the later split
/// lose the same points. Signatures are always spatial, whatever
/// `cfg.link.signature` says about the accuracy measurement.
pub fn signature_closure(traces: &[Trace], anchors: &AnchorSet, cfg: &ClosureConfig) -> Result<(Vec<Trace>, ClosureReport)> {
    if cfg.rounds < 1 {
        return Err(Error::param("closure needs at least one round"));
    }
    if cfg.m < 1 {
        return Err(Error::param("closure m must be at least 1"));
    }
    let mut report = ClosureReport::default();
    let (accuracy, utility) = evaluate(traces, traces, anchors, cfg)?;
    report.rounds.push(ClosureRound {
        round: 0,
        accuracy,
        utility,
        points_removed: 0,
        emptied: Vec::new(),
    });

    let mut current = traces.to_vec();
    for round in 1..=cfg.rounds {
        let (next, removed) = suppress_round(&current, cfg.m)?;
        let before: usize = current.iter().map(Trace::len).sum();
        let after: usize = next.iter().map(Trace::len).sum();
        for (t, r) in next.iter().zip(removed) {
            report.removed.entry(t.object_id.clone()).or_default().push(r);
        }
        current = next;
        let emptied = current
            .iter()
            .filter(|t| t.is_empty())
            .map(|t| t.object_id.clone())
            .collect();
        let (accuracy, utility) = evaluate(traces, &current, anchors, cfg)?;
        report.rounds.push(ClosureRound {
            round,
            accuracy,
            utility,
            points_removed: before - after,
            emptied,
        });
    }
    Ok((current, report))
}

impl ClosureReport {
    /// `round,acc1,data_remain,mbr_overlap,grid_coverage_large,grid_coverage_small,points_removed,emptied`
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "round",
            "acc1",
            "data_remain",
            "mbr_overlap",
            "grid_coverage_large",
            "grid_coverage_small",
            "points_removed",
            "emptied",
        ])?;
        for r in &self.rounds {
            csv.write_record([
                r.round.to_string(),
                r.acc1().to_string(),
                r.utility.data_remain.to_string(),
                r.utility.mbr_overlap.to_string(),
                r.utility.grid_coverage_large.to_string(),
                r.utility.grid_coverage_small.to_string(),
                r.points_removed.to_string(),
                r.emptied.len().to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// The link config closure uses by default: spatial signatures, CUT to `m`.
pub fn closure_link_config(m: usize) -> LinkConfig {
    LinkConfig {
        signature: SignatureSpec::Spatial,
        m: Some(m),
        ..LinkConfig::default()
    }
}

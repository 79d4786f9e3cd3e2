use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::signature::DimId;
use crate::trace_model::Trace;

/// Document frequencies of dimensions over a set of objects.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_objects: usize,
    pub doc_freq: HashMap<DimId, u32>,
}

impl CorpusStats {
    /// Each document contributes at most once per dim.
    pub fn from_documents<I, D>(docs: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = DimId>,
    {
        let mut stats = CorpusStats::default();
        for doc in docs {
            stats.add_document(doc);
        }
        stats
    }

    pub fn add_document(&mut self, doc: impl IntoIterator<Item = DimId>) {
        let distinct: HashSet<DimId> = doc.into_iter().collect();
        for d in distinct {
            *self.doc_freq.entry(d).or_insert(0) += 1;
        }
        self.n_objects += 1;
    }

    pub fn merge(mut self, other: CorpusStats) -> Self {
        self.n_objects += other.n_objects;
        for (d, c) in other.doc_freq {
            *self.doc_freq.entry(d).or_insert(0) += c;
        }
        self
    }

    /// Natural-log inverse document frequency; `None` for unseen dims.
    pub fn idf(&self, dim: DimId) -> Option<f64> {
        self.doc_freq
            .get(&dim)
            .map(|&df| (self.n_objects as f64 / df as f64).ln())
    }

    pub fn dimensionality(&self) -> usize {
        self.doc_freq.len()
    }
}

/// Anchor document frequencies over traces.
pub fn build_corpus_stats(traces: &[Trace]) -> CorpusStats {
    traces
        .par_iter()
        .map(|t| {
            let mut s = CorpusStats::default();
            s.add_document(t.anchors());
            s
        })
        .reduce(CorpusStats::default, CorpusStats::merge)
}

//! TF-IDF signature builders over anchors, q-grams and grid-time cells.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::corpus::CorpusStats;
use super::signature::{DimId, Signature, SignatureKind};
use super::temporal::{bin_of, bins_for};
use crate::error::{Error, Result};
use crate::trace_model::{AnchorId, AnchorSet, LocalClock, Trace};

/// What to do with a dimension the corpus has never seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownDims {
    /// Fail with [`Error::MissingDimension`].
    #[default]
    Error,
    /// Skip it; used for query objects weighted against a reference corpus.
    Skip,
}

/// TF-IDF over raw counts: `(count / total) * ln(n / df)`, L2-normalized.
pub fn tfidf_signature(
    kind: SignatureKind,
    counts: &HashMap<DimId, u32>,
    total: usize,
    stats: &CorpusStats,
    unknown: UnknownDims,
) -> Result<Signature> {
    let mut entries = Vec::with_capacity(counts.len());
    for (&dim, &count) in counts {
        let idf = match (stats.idf(dim), unknown) {
            (Some(idf), _) => idf,
            (None, UnknownDims::Skip) => continue,
            (None, UnknownDims::Error) => return Err(Error::MissingDimension(dim)),
        };
        entries.push((dim, count as f64 / total as f64 * idf));
    }
    Ok(Signature::from_entries(kind, entries).normalized())
}

fn counts_of(dims: impl Iterator<Item = DimId>) -> HashMap<DimId, u32> {
    let mut counts = HashMap::new();
    for d in dims {
        *counts.entry(d).or_insert(0) += 1;
    }
    counts
}

pub fn build_spatial_signature(trace: &Trace, stats: &CorpusStats) -> Result<Signature> {
    build_spatial_signature_with(trace, stats, UnknownDims::Error)
}

pub fn build_spatial_signature_with(
    trace: &Trace,
    stats: &CorpusStats,
    unknown: UnknownDims,
) -> Result<Signature> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    tfidf_signature(
        SignatureKind::Spatial,
        &counts_of(trace.anchors()),
        trace.len(),
        stats,
        unknown,
    )
}

/// Dense ids for q-grams, assigned in order of first appearance.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "VocabularyFile")]
pub struct GramVocabulary {
    q: usize,
    grams: Vec<Vec<AnchorId>>,
    #[serde(skip)]
    index: HashMap<Vec<AnchorId>, DimId>,
}

#[derive(Deserialize)]
struct VocabularyFile {
    q: usize,
    grams: Vec<Vec<AnchorId>>,
}

impl From<VocabularyFile> for GramVocabulary {
    fn from(f: VocabularyFile) -> Self {
        let index = f
            .grams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i as DimId))
            .collect();
        GramVocabulary {
            q: f.q,
            grams: f.grams,
            index,
        }
    }
}

impl GramVocabulary {
    pub fn new(q: usize) -> Self {
        GramVocabulary {
            q,
            ..Default::default()
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn intern(&mut self, gram: &[AnchorId]) -> DimId {
        if let Some(&id) = self.index.get(gram) {
            return id;
        }
        let id = self.grams.len() as DimId;
        self.grams.push(gram.to_vec());
        self.index.insert(gram.to_vec(), id);
        id
    }

    pub fn lookup(&self, gram: &[AnchorId]) -> Option<DimId> {
        self.index.get(gram).copied()
    }

    pub fn gram(&self, id: DimId) -> Option<&[AnchorId]> {
        self.grams.get(id as usize).map(|g| g.as_slice())
    }
}

/// Gram vocabulary plus gram document frequencies for one corpus.
#[derive(Debug, Clone)]
pub struct GramCorpus {
    pub vocab: GramVocabulary,
    pub stats: CorpusStats,
}

impl GramCorpus {
    pub fn q(&self) -> usize {
        self.vocab.q()
    }
}

fn anchor_seq(trace: &Trace) -> Vec<AnchorId> {
    trace.anchors().collect()
}

pub fn build_gram_corpus(traces: &[Trace], q: usize) -> Result<GramCorpus> {
    if q < 1 {
        return Err(Error::param("q must be at least 1"));
    }
    let mut vocab = GramVocabulary::new(q);
    let mut stats = CorpusStats::default();
    for t in traces {
        let seq = anchor_seq(t);
        let ids: Vec<DimId> = seq.windows(q).map(|g| vocab.intern(g)).collect();
        stats.add_document(ids);
    }
    Ok(GramCorpus { vocab, stats })
}

pub fn build_sequential_signature(trace: &Trace, corpus: &GramCorpus) -> Result<Signature> {
    build_sequential_signature_with(trace, corpus, UnknownDims::Error)
}

pub fn build_sequential_signature_with(
    trace: &Trace,
    corpus: &GramCorpus,
    unknown: UnknownDims,
) -> Result<Signature> {
    let q = corpus.q();
    let seq = anchor_seq(trace);
    if seq.len() < q {
        return Err(Error::EmptySignature(format!(
            "trace {} has {} points, fewer than q={q}",
            trace.object_id,
            seq.len()
        )));
    }
    let mut counts: HashMap<DimId, u32> = HashMap::new();
    for g in seq.windows(q) {
        match (corpus.vocab.lookup(g), unknown) {
            (Some(id), _) => *counts.entry(id).or_insert(0) += 1,
            (None, UnknownDims::Skip) => {}
            (None, UnknownDims::Error) => {
                return Err(Error::EmptySignature(format!(
                    "gram {g:?} of {} is not in the vocabulary",
                    trace.object_id
                )))
            }
        }
    }
    tfidf_signature(
        SignatureKind::Sequential { q: q as u32 },
        &counts,
        seq.len() - q + 1,
        &corpus.stats,
        unknown,
    )
}

/// A `cells x cells` partition of a lon/lat bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cells: u32,
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl GridSpec {
    pub fn new(cells: u32, bounds: (f64, f64, f64, f64)) -> Result<Self> {
        if cells < 1 {
            return Err(Error::param("grid must have at least one cell per axis"));
        }
        let (min_lon, min_lat, max_lon, max_lat) = bounds;
        if !(min_lon <= max_lon && min_lat <= max_lat) {
            return Err(Error::param("grid bounds are inverted"));
        }
        Ok(GridSpec {
            cells,
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        })
    }

    /// Grid over the bounding box of every anchor.
    pub fn over_anchors(cells: u32, anchors: &AnchorSet) -> Result<Self> {
        Self::new(cells, anchors.bounds())
    }

    fn axis(v: f64, lo: f64, hi: f64, cells: u32) -> u32 {
        if hi <= lo {
            return 0;
        }
        (((v - lo) / (hi - lo) * cells as f64).floor().max(0.0) as u32).min(cells - 1)
    }

    /// Row-major cell index of a coordinate (clamped into the box).
    pub fn cell(&self, lon: f64, lat: f64) -> u32 {
        let col = Self::axis(lon, self.min_lon, self.max_lon, self.cells);
        let row = Self::axis(lat, self.min_lat, self.max_lat, self.cells);
        row * self.cells + col
    }
}

/// Everything needed to map a trace point to a spatiotemporal dimension.
#[derive(Debug, Clone, Copy)]
pub struct CellMapper<'a> {
    pub grid: GridSpec,
    pub dt_hours: f64,
    pub clock: LocalClock,
    pub anchors: &'a AnchorSet,
}

impl CellMapper<'_> {
    pub fn kind(&self) -> Result<SignatureKind> {
        Ok(SignatureKind::Spatiotemporal {
            grid: self.grid.cells,
            bins: bins_for(self.dt_hours)?,
        })
    }

    /// `cell_index * bins + bin` for each point.
    pub fn dims<'t>(&'t self, trace: &'t Trace) -> Result<impl Iterator<Item = Result<DimId>> + 't> {
        let bins = bins_for(self.dt_hours)?;
        Ok(trace.points.iter().map(move |p| {
            let (lon, lat) = self
                .anchors
                .coords(p.anchor)
                .ok_or_else(|| Error::param(format!("anchor {} not in anchor set", p.anchor)))?;
            let bin = bin_of(self.clock.seconds_of_day(p.t), self.dt_hours);
            Ok(self.grid.cell(lon, lat) * bins + bin)
        }))
    }
}

pub fn build_cell_corpus(traces: &[Trace], mapper: &CellMapper<'_>) -> Result<CorpusStats> {
    let mut stats = CorpusStats::default();
    for t in traces {
        let dims = mapper.dims(t)?.collect::<Result<Vec<_>>>()?;
        stats.add_document(dims);
    }
    Ok(stats)
}

pub fn build_spatiotemporal_signature(
    trace: &Trace,
    mapper: &CellMapper<'_>,
    stats: &CorpusStats,
    unknown: UnknownDims,
) -> Result<Signature> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let dims = mapper.dims(trace)?.collect::<Result<Vec<_>>>()?;
    tfidf_signature(
        mapper.kind()?,
        &counts_of(dims.into_iter()),
        trace.len(),
        stats,
        unknown,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::build_corpus_stats;
    use crate::trace_model::DistanceMetric;

    #[test]
    fn hand_evaluated_tfidf() {
        // n = 4, |O_p1| = 2, |O_p2| = 4.
        let q = Trace::from_pairs("q", &[(1, 0), (1, 1), (2, 2)]);
        let traces = vec![
            q.clone(),
            Trace::from_pairs("b", &[(1, 0), (2, 1)]),
            Trace::from_pairs("c", &[(2, 0)]),
            Trace::from_pairs("d", &[(2, 0), (3, 1)]),
        ];
        let stats = build_corpus_stats(&traces);
        let raw_p1 = 2.0 / 3.0 * (2.0f64).ln();
        assert!((raw_p1 - 0.4621).abs() < 1e-4);
        let s = build_spatial_signature(&q, &stats).unwrap();
        assert_eq!(s.dims(), &[1]);
        assert!((s.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_object_corpus() {
        let t = Trace::from_pairs("a", &[(4, 0)]);
        let stats = build_corpus_stats(std::slice::from_ref(&t));
        // idf = ln(1/1) = 0, so every weight vanishes.
        assert!(build_spatial_signature(&t, &stats).unwrap().is_empty());
        let stats = CorpusStats {
            n_objects: 2,
            doc_freq: [(4, 1)].into_iter().collect(),
        };
        let s = build_spatial_signature(&t, &stats).unwrap();
        assert_eq!(s.dims(), &[4]);
        assert_eq!(s.weights(), &[1.0]);
    }

    #[test]
    fn missing_anchor_is_an_error_unless_skipped() {
        let stats = CorpusStats {
            n_objects: 2,
            doc_freq: [(1, 1)].into_iter().collect(),
        };
        let t = Trace::from_pairs("a", &[(1, 0), (9, 1)]);
        assert!(matches!(
            build_spatial_signature(&t, &stats),
            Err(Error::MissingDimension(9))
        ));
        let s = build_spatial_signature_with(&t, &stats, UnknownDims::Skip).unwrap();
        assert_eq!(s.dims(), &[1]);
    }

    #[test]
    fn sliding_window_grams() {
        let t = Trace::from_pairs("a", &[(0, 0), (1, 1), (0, 2), (1, 3)]);
        let other = Trace::from_pairs("b", &[(5, 0), (6, 1)]);
        let corpus = build_gram_corpus(&[t.clone(), other], 2).unwrap();
        let ab = corpus.vocab.lookup(&[0, 1]).unwrap();
        let ba = corpus.vocab.lookup(&[1, 0]).unwrap();
        let s = build_sequential_signature(&t, &corpus).unwrap();
        // Both grams have idf ln 2 and counts 2 : 1.
        let (wab, wba) = (s.get(ab).unwrap(), s.get(ba).unwrap());
        assert!((wab / wba - 2.0).abs() < 1e-12);
    }

    #[test]
    fn whole_trace_gram() {
        let t = Trace::from_pairs("a", &[(0, 0), (1, 1), (2, 2)]);
        let mut corpus = build_gram_corpus(std::slice::from_ref(&t), 3).unwrap();
        corpus.stats.n_objects = 2;
        let s = build_sequential_signature(&t, &corpus).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.weights(), &[1.0]);
    }

    #[test]
    fn short_trace_has_no_grams() {
        let t = Trace::from_pairs("a", &[(0, 0)]);
        let corpus = build_gram_corpus(std::slice::from_ref(&t), 2).unwrap();
        assert!(matches!(
            build_sequential_signature(&t, &corpus),
            Err(Error::EmptySignature(_))
        ));
    }

    fn mapper(anchors: &AnchorSet, cells: u32, dt: f64) -> CellMapper<'_> {
        CellMapper {
            grid: GridSpec::over_anchors(cells, anchors).unwrap(),
            dt_hours: dt,
            clock: LocalClock::new(0.0),
            anchors,
        }
    }

    #[test]
    fn same_cell_different_intervals() {
        let anchors = AnchorSet::from_coords(&[(0.0, 0.0), (1.0, 1.0)], DistanceMetric::Planar).unwrap();
        let m = mapper(&anchors, 100, 1.0);
        let t = Trace::from_pairs("a", &[(0, 0), (0, 5 * 3600)]);
        let dims = m.dims(&t).unwrap().collect::<Result<Vec<_>>>().unwrap();
        assert_eq!(dims, vec![0, 5]);
        let stats = CorpusStats {
            n_objects: 2,
            doc_freq: [(0, 1), (5, 1)].into_iter().collect(),
        };
        let s = build_spatiotemporal_signature(&t, &m, &stats, UnknownDims::Error).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.kind(), SignatureKind::Spatiotemporal { grid: 100, bins: 24 });
    }

    #[test]
    fn grid_sizes_from_sweep_accepted() {
        let anchors = AnchorSet::from_coords(&[(0.0, 0.0), (1.0, 1.0)], DistanceMetric::Planar).unwrap();
        for g in [100, 200, 300] {
            let m = mapper(&anchors, g, 2.0);
            let t = Trace::from_pairs("a", &[(1, 0)]);
            let stats = build_cell_corpus(&[t.clone(), Trace::from_pairs("b", &[(0, 0)])], &m).unwrap();
            let s = build_spatiotemporal_signature(&t, &m, &stats, UnknownDims::Error).unwrap();
            assert_eq!(s.dims(), &[(g * g - 1) * 12]);
            assert_eq!(s.weights(), &[1.0]);
        }
    }

    #[test]
    fn bad_dt_rejected_by_mapper() {
        let anchors = AnchorSet::from_coords(&[(0.0, 0.0)], DistanceMetric::Planar).unwrap();
        let m = mapper(&anchors, 10, 5.0);
        assert!(m.kind().is_err());
    }

    #[test]
    fn vocabulary_json_round_trip() {
        let traces = vec![Trace::from_pairs("a", &[(3, 0), (1, 1), (3, 2), (1, 3)])];
        let corpus = build_gram_corpus(&traces, 2).unwrap();
        let json = serde_json::to_string(&corpus.vocab).unwrap();
        let back: GramVocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.lookup(&[1, 3]), corpus.vocab.lookup(&[1, 3]));
        assert_eq!(back.gram(0), Some(&[3, 1][..]));
    }
}

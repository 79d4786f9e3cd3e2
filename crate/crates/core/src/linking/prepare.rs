use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduction::{cut_reduce_with, mbr_of, Mbr};
use crate::signatures::{
    build_cell_corpus, build_corpus_stats, build_gram_corpus, build_sequential_signature_with,
    build_spatial_signature_with, build_spatiotemporal_signature, bins_for, CellMapper, CorpusStats,
    GramCorpus, GramVocabulary, GridSpec, Signature, SignatureKind, UnknownDims,
};
use crate::trace_model::{AnchorSet, LocalClock, Trace};
use crate::wrtree::IndexedObject;

/// Which signature representation to build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SignatureSpec {
    #[default]
    Spatial,
    Sequential { q: usize },
    Spatiotemporal { grid: u32, dt_hours: f64 },
}

#[derive(Debug, Clone)]
enum Fitted {
    Spatial(CorpusStats),
    Sequential(GramCorpus),
    Spatiotemporal {
        grid: GridSpec,
        dt_hours: f64,
        stats: CorpusStats,
    },
}

/// Corpus statistics fitted on the reference half, used to weight both halves.
#[derive(Debug, Clone)]
pub struct SignatureModel<'a> {
    anchors: &'a AnchorSet,
    clock: LocalClock,
    fitted: Fitted,
}

impl<'a> SignatureModel<'a> {
    pub fn fit(reference: &[Trace], spec: SignatureSpec, anchors: &'a AnchorSet, clock: LocalClock) -> Result<Self> {
        let fitted = match spec {
            SignatureSpec::Spatial => Fitted::Spatial(build_corpus_stats(reference)),
            SignatureSpec::Sequential { q } => Fitted::Sequential(build_gram_corpus(reference, q)?),
            SignatureSpec::Spatiotemporal { grid, dt_hours } => {
                bins_for(dt_hours)?;
                let grid = GridSpec::over_anchors(grid, anchors)?;
                let mapper = CellMapper {
                    grid,
                    dt_hours,
                    clock,
                    anchors,
                };
                Fitted::Spatiotemporal {
                    grid,
                    dt_hours,
                    stats: build_cell_corpus(reference, &mapper)?,
                }
            }
        };
        Ok(SignatureModel { anchors, clock, fitted })
    }

    pub fn kind(&self) -> SignatureKind {
        match &self.fitted {
            Fitted::Spatial(_) => SignatureKind::Spatial,
            Fitted::Sequential(c) => SignatureKind::Sequential { q: c.q() as u32 },
            Fitted::Spatiotemporal { grid, dt_hours, .. } => SignatureKind::Spatiotemporal {
                grid: grid.cells,
                bins: bins_for(*dt_hours).expect("checked at fit"),
            },
        }
    }

    pub fn anchors(&self) -> &AnchorSet {
        self.anchors
    }

    /// Gram vocabulary of a sequential model.
    pub fn vocabulary(&self) -> Option<&GramVocabulary> {
        match &self.fitted {
            Fitted::Sequential(c) => Some(&c.vocab),
            _ => None,
        }
    }

    fn mapper(&self) -> Option<CellMapper<'_>> {
        match &self.fitted {
            Fitted::Spatiotemporal { grid, dt_hours, .. } => Some(CellMapper {
                grid: *grid,
                dt_hours: *dt_hours,
                clock: self.clock,
                anchors: self.anchors,
            }),
            _ => None,
        }
    }

    /// Full signature of one trace. Traces too short to yield any dimension
    /// give an empty signature rather than an error.
    pub fn signature(&self, trace: &Trace, unknown: UnknownDims) -> Result<Signature> {
        match &self.fitted {
            Fitted::Spatial(stats) => {
                if trace.is_empty() {
                    return Ok(Signature::empty(self.kind()));
                }
                build_spatial_signature_with(trace, stats, unknown)
            }
            Fitted::Sequential(corpus) => {
                if trace.len() < corpus.q() {
                    return Ok(Signature::empty(self.kind()));
                }
                build_sequential_signature_with(trace, corpus, unknown)
            }
            Fitted::Spatiotemporal { stats, .. } => {
                if trace.is_empty() {
                    return Ok(Signature::empty(self.kind()));
                }
                build_spatiotemporal_signature(trace, &self.mapper().expect("spatiotemporal"), stats, unknown)
            }
        }
    }

    pub fn signatures(&self, traces: &[Trace], unknown: UnknownDims) -> Result<Vec<(String, Signature)>> {
        traces
            .par_iter()
            .map(|t| Ok((t.object_id.clone(), self.signature(t, unknown)?)))
            .collect()
    }

    /// How dimensions map back to locations.
    pub fn support(&self) -> Support<'_> {
        match &self.fitted {
            Fitted::Spatial(_) => Support::Anchors(self.anchors),
            Fitted::Sequential(c) => Support::Grams(&c.vocab, self.anchors),
            Fitted::Spatiotemporal { grid, dt_hours, .. } => Support::Cells {
                grid: *grid,
                bins: bins_for(*dt_hours).expect("checked at fit"),
            },
        }
    }

    pub fn support_mbr(&self, sig: &Signature) -> Result<Mbr> {
        self.support().mbr(sig)
    }
}

/// Maps each dimension of a signature back to the places it stands for.
#[derive(Debug, Clone, Copy)]
pub enum Support<'a> {
    Anchors(&'a AnchorSet),
    Grams(&'a GramVocabulary, &'a AnchorSet),
    Cells { grid: GridSpec, bins: u32 },
}

impl<'a> Support<'a> {
    /// Support for stored signatures of `kind`; sequential ones need the
    /// vocabulary they were built with.
    pub fn for_kind(kind: SignatureKind, anchors: &'a AnchorSet, vocab: Option<&'a GramVocabulary>) -> Result<Self> {
        match kind {
            SignatureKind::Spatial => Ok(Support::Anchors(anchors)),
            SignatureKind::Sequential { q } => {
                let v = vocab.ok_or_else(|| Error::param("sequential signatures need their gram vocabulary"))?;
                if v.q() != q as usize {
                    return Err(Error::param(format!("vocabulary has q={}, signatures have q={q}", v.q())));
                }
                Ok(Support::Grams(v, anchors))
            }
            SignatureKind::Spatiotemporal { grid, bins } => Ok(Support::Cells {
                grid: GridSpec::over_anchors(grid, anchors)?,
                bins,
            }),
        }
    }

    /// Rectangle covering the locations behind every dimension of `sig`.
    ///
    /// Two signatures sharing a dimension always get intersecting rectangles,
    /// whatever the representation.
    pub fn mbr(&self, sig: &Signature) -> Result<Mbr> {
        if sig.is_empty() {
            return Err(Error::EmptySignature("cannot bound an empty signature".into()));
        }
        match *self {
            Support::Anchors(anchors) => mbr_of(sig, anchors),
            Support::Grams(vocab, anchors) => {
                let mut pts = Vec::new();
                for &d in sig.dims() {
                    let gram = vocab
                        .gram(d)
                        .ok_or_else(|| Error::param(format!("dimension {d} is not a known gram")))?;
                    for &a in gram {
                        pts.push(
                            anchors
                                .coords(a)
                                .ok_or_else(|| Error::param(format!("anchor {a} not in anchor set")))?,
                        );
                    }
                }
                Ok(Mbr::from_points(pts).expect("non-empty"))
            }
            Support::Cells { grid, bins } => {
                let (w, h) = (
                    (grid.max_lon - grid.min_lon) / grid.cells as f64,
                    (grid.max_lat - grid.min_lat) / grid.cells as f64,
                );
                let n_cells = grid.cells * grid.cells;
                sig.dims()
                    .iter()
                    .map(|&d| {
                        let cell = d / bins;
                        if cell >= n_cells {
                            return Err(Error::param(format!("dimension {d} is outside the grid")));
                        }
                        let (row, col) = ((cell / grid.cells) as f64, (cell % grid.cells) as f64);
                        Ok(Mbr::new(
                            grid.min_lon + col * w,
                            grid.min_lat + row * h,
                            grid.min_lon + (col + 1.0) * w,
                            grid.min_lat + (row + 1.0) * h,
                        ))
                    })
                    .reduce(|a, b| Ok(a?.union(&b?)))
                    .expect("non-empty")
            }
        }
    }
}

/// Objects ready for indexing or querying, plus the ids whose signature came
/// out empty (they can be queried but never match).
#[derive(Debug, Clone, Default)]
pub struct ObjectSet {
    pub objects: Vec<IndexedObject>,
    pub unsignable: Vec<String>,
}

impl ObjectSet {
    pub fn len(&self) -> usize {
        self.objects.len() + self.unsignable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.objects
            .iter()
            .map(|o| o.id.as_str())
            .chain(self.unsignable.iter().map(String::as_str))
    }
}

/// CUT-reduces each signature to `m` dims (when given) and attaches its MBR.
pub fn prepare_objects(
    sigs: Vec<(String, Signature)>,
    m: Option<usize>,
    renormalize: bool,
    support: &Support<'_>,
) -> Result<ObjectSet> {
    let prepared: Vec<Result<std::result::Result<IndexedObject, String>>> = sigs
        .into_par_iter()
        .map(|(id, sig)| {
            if sig.is_empty() {
                return Ok(Err(id));
            }
            let sig = match m {
                Some(m) => cut_reduce_with(&sig, m, renormalize)?,
                None => sig,
            };
            let mbr = support.mbr(&sig)?;
            Ok(Ok(IndexedObject::new(id, sig, mbr)))
        })
        .collect();
    let mut out = ObjectSet::default();
    for p in prepared {
        match p? {
            Ok(o) => out.objects.push(o),
            Err(id) => out.unsignable.push(id),
        }
    }
    Ok(out)
}

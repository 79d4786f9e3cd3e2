use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{Engine, LinkIndex};
use super::prepare::ObjectSet;
use crate::error::{Error, Result};
use crate::wrtree::{KnnResult, Neighbor};

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_secs: f64,
    pub link_secs: f64,
    pub mean_query_secs: f64,
}

/// Top-k candidates for every query object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkingRun {
    pub engine: Engine,
    pub k: usize,
    pub m: Option<usize>,
    pub results: BTreeMap<String, KnnResult>,
    pub timings: Timings,
}

impl LinkingRun {
    pub fn new(engine: Engine, k: usize, m: Option<usize>) -> Self {
        LinkingRun {
            engine,
            k,
            m,
            results: BTreeMap::new(),
            timings: Timings::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn get(&self, query: &str) -> Option<&KnnResult> {
        self.results.get(query)
    }
}

/// Runs one k-NN search per query against `index`, in parallel.
pub fn link_all(queries: &ObjectSet, index: &LinkIndex, engine: Engine, k: usize, m: Option<usize>) -> Result<LinkingRun> {
    if index.engine() != engine {
        return Err(Error::EngineMismatch(format!(
            "requested {engine} but the index was built for {}",
            index.engine()
        )));
    }
    if k < 1 {
        return Err(Error::param("k must be at least 1"));
    }
    if let (Some(kind), Some(q)) = (index.kind(), queries.objects.first()) {
        if q.signature.kind() != kind {
            return Err(Error::KindMismatch(q.signature.kind().to_string(), kind.to_string()));
        }
    }
    let start = Instant::now();
    let found: Vec<(String, KnnResult)> = queries
        .objects
        .par_iter()
        .map(|q| (q.id.clone(), index.knn(q, k)))
        .collect();
    let link_secs = start.elapsed().as_secs_f64();

    let mut run = LinkingRun::new(engine, k, m);
    for (id, r) in found {
        if run.results.insert(id.clone(), r).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    for id in &queries.unsignable {
        if run.results.insert(id.clone(), KnnResult::default()).is_some() {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    run.timings.link_secs = link_secs;
    run.timings.mean_query_secs = if run.is_empty() { 0.0 } else { link_secs / run.len() as f64 };
    Ok(run)
}

/// Fraction of queries whose own id appears in their top-k candidates.
pub fn accuracy_at_k(run: &LinkingRun, k: usize) -> f64 {
    if run.is_empty() {
        return 0.0;
    }
    let hits = run
        .results
        .iter()
        .filter(|(q, r)| r.neighbors.iter().take(k).any(|n| &n.id == *q))
        .count();
    hits as f64 / run.len() as f64
}

/// Acc@1..=k keyed by k.
pub fn accuracy_curve(run: &LinkingRun, k: usize) -> BTreeMap<usize, f64> {
    (1..=k).map(|i| (i, accuracy_at_k(run, i))).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ResultRow {
    query_id: String,
    rank: usize,
    candidate_id: String,
    similarity: f64,
}

/// `query_id,rank,candidate_id,similarity`, ranks from 1, queries in id order.
pub fn write_results(run: &LinkingRun, w: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for (q, r) in &run.results {
        for (i, n) in r.neighbors.iter().enumerate() {
            csv.serialize(ResultRow {
                query_id: q.clone(),
                rank: i + 1,
                candidate_id: n.id.clone(),
                similarity: n.similarity,
            })?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Reads a results file back into query → candidates. Queries with no
/// candidates have no rows and so do not appear.
pub fn read_results(r: impl Read) -> Result<BTreeMap<String, KnnResult>> {
    let mut csv = csv::Reader::from_reader(r);
    let mut rows: BTreeMap<String, Vec<(usize, Neighbor)>> = BTreeMap::new();
    for row in csv.deserialize() {
        let row: ResultRow = row?;
        if row.rank == 0 {
            return Err(Error::Format(format!("rank 0 for query {}", row.query_id)));
        }
        rows.entry(row.query_id).or_default().push((
            row.rank,
            Neighbor {
                id: row.candidate_id,
                similarity: row.similarity,
            },
        ));
    }
    Ok(rows
        .into_iter()
        .map(|(q, mut v)| {
            v.sort_by_key(|x| x.0);
            (q, KnnResult { neighbors: v.into_iter().map(|x| x.1).collect() })
        })
        .collect())
}

/// Metrics document written next to the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: BTreeMap<usize, f64>,
    pub timings: Timings,
    pub engine: Engine,
    pub m: Option<usize>,
    pub k: usize,
    pub seed: u64,
    pub queries: usize,
    pub references: usize,
}

impl Metrics {
    pub fn from_run(run: &LinkingRun, seed: u64, references: usize) -> Self {
        Metrics {
            acc: accuracy_curve(run, run.k),
            timings: run.timings,
            engine: run.engine,
            m: run.m,
            k: run.k,
            seed,
            queries: run.len(),
            references,
        }
    }
}

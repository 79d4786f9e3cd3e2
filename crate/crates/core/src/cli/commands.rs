use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::args::{Command, IndexAction};
use super::config::{RunConfig, SignatureType};
use super::table::{f4, render};
use super::CliError;
use crate::linking::{
    accuracy_curve, blocking_pairs, link_all, prepare_halves, prepare_objects, read_results, rerank,
    stable_marriage, write_results, Engine, LinkIndex, LinkingRun, Marriage, MarriageOptions, Metrics,
    ObjectSet, SignatureModel, Support,
};
use crate::privacy::{signature_closure, ClosureConfig, ClosureReport};
use crate::reduction::cut_reduce_with;
use crate::signatures::io::{read_signatures, write_signatures, SignatureRecord};
use crate::signatures::{GramVocabulary, Signature, SignatureKind, UnknownDims};
use crate::trace_model::io::{
    read_anchors, read_calibrated, read_raw_traces, write_anchors, write_calibrated, write_raw_traces,
};
use crate::trace_model::{
    calibrate_trace, filter_min_points, generate_synthetic, split_dataset, to_raw_points, AnchorSet,
    SplitOutput, Trace,
};
use crate::wrtree::{bulk_load, load_index, validate, WrTree};

type CliResult<T> = std::result::Result<T, CliError>;

pub fn dispatch(command: &Command, cfg: &RunConfig) -> CliResult<()> {
    match command {
        Command::Synth => synth(cfg),
        Command::Ingest => ingest(cfg),
        Command::Split => split(cfg),
        Command::Signature => signature(cfg),
        Command::Reduce => reduce(cfg),
        Command::Index { action } => match action {
            IndexAction::Build => index_build(cfg),
            IndexAction::Insert => index_insert(cfg),
            IndexAction::Validate => index_validate(cfg),
        },
        Command::Link => link(cfg),
        Command::Eval => eval(cfg),
        Command::Rerank => rerank_cmd(cfg),
        Command::Marry => marry(cfg),
        Command::Closure => closure(cfg),
        Command::Bench => bench(cfg),
        Command::Pipeline => pipeline(cfg),
    }
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.join(name)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_traces(path: &Path, traces: &[Trace]) -> CliResult<()> {
    let mut w = create(path)?;
    write_calibrated(&mut w, traces)?;
    w.flush()?;
    Ok(())
}

fn load_anchors(cfg: &RunConfig) -> CliResult<AnchorSet> {
    let path = RunConfig::require(&cfg.data.anchors, "anchors")?;
    Ok(read_anchors(open(path)?, cfg.data.metric.into())?)
}

fn load_traces(path: &Option<PathBuf>, what: &str) -> CliResult<Vec<Trace>> {
    let path = RunConfig::require(path, what)?;
    Ok(read_calibrated(open(path)?)?)
}

fn load_records(path: &Option<PathBuf>, what: &str) -> CliResult<Vec<SignatureRecord>> {
    let path = RunConfig::require(path, what)?;
    Ok(read_signatures(open(path)?)?)
}

fn load_vocab(cfg: &RunConfig) -> CliResult<Option<GramVocabulary>> {
    match &cfg.data.vocab {
        Some(p) => Ok(Some(serde_json::from_reader(open(p)?)?)),
        None => Ok(None),
    }
}

fn save_records(path: &Path, records: &[SignatureRecord]) -> CliResult<()> {
    let mut w = create(path)?;
    write_signatures(&mut w, records)?;
    w.flush()?;
    Ok(())
}

fn to_records(sigs: &[(String, Signature)], m: Option<usize>) -> Vec<SignatureRecord> {
    sigs.iter().map(|(id, s)| SignatureRecord::new(id.clone(), s, m)).collect()
}

fn object_records(set: &ObjectSet, kind: SignatureKind, m: Option<usize>) -> Vec<SignatureRecord> {
    let empty = Signature::empty(kind);
    let mut records: Vec<SignatureRecord> = set
        .objects
        .iter()
        .map(|o| SignatureRecord::new(o.id.clone(), &o.signature, m))
        .chain(set.unsignable.iter().map(|id| SignatureRecord::new(id.clone(), &empty, m)))
        .collect();
    records.sort_by(|a, b| a.object_id.cmp(&b.object_id));
    records
}

fn kind_of(records: &[SignatureRecord], what: &str) -> CliResult<SignatureKind> {
    records
        .first()
        .map(|r| r.kind)
        .ok_or_else(|| CliError::Runtime(crate::Error::Format(format!("{what} holds no signatures"))))
}

/// Signature files back to indexable objects; `m` comes from the records.
fn records_to_objects(records: &[SignatureRecord], support: &Support<'_>) -> CliResult<ObjectSet> {
    let sigs = records.iter().map(|r| (r.object_id.clone(), r.signature())).collect();
    Ok(prepare_objects(sigs, None, false, support)?)
}

fn check_kind(a: SignatureKind, b: SignatureKind) -> CliResult<()> {
    if a != b {
        return Err(crate::Error::KindMismatch(a.to_string(), b.to_string()).into());
    }
    Ok(())
}

fn save_tree(tree: &WrTree, path: &Path) -> CliResult<()> {
    // Readers of the old file never see a half-written one.
    let tmp = path.with_extension("wrt.tmp");
    crate::wrtree::save_index(tree, &tmp)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn synth(cfg: &RunConfig) -> CliResult<()> {
    let data = generate_synthetic(&cfg.synthetic)?;
    let mut w = create(&out(cfg, "anchors.csv"))?;
    write_anchors(&mut w, &data.anchors)?;
    w.flush()?;
    write_traces(&out(cfg, "traces.csv"), &data.traces)?;
    if cfg.synth.write_raw {
        let raw: Vec<_> = data
            .traces
            .par_iter()
            .enumerate()
            .map(|(i, t)| {
                let seed = cfg.synthetic.seed.wrapping_add(i as u64);
                (t.object_id.clone(), to_raw_points(t, &data.anchors, cfg.synth.raw_jitter_deg, seed))
            })
            .collect();
        let mut w = create(&out(cfg, "raw.csv"))?;
        write_raw_traces(&mut w, &raw)?;
        w.flush()?;
    }
    let points: usize = data.traces.iter().map(Trace::len).sum();
    println!(
        "{}",
        render(
            &["objects", "anchors", "points"],
            &[vec![data.traces.len().to_string(), data.anchors.len().to_string(), points.to_string()]],
        )
    );
    Ok(())
}

fn ingest_raw(cfg: &RunConfig, anchors: &AnchorSet) -> CliResult<(Vec<Trace>, usize, usize)> {
    let path = RunConfig::require(&cfg.data.raw, "raw")?;
    let raw = read_raw_traces(open(path)?)?;
    let raw_points = raw.iter().map(|(_, p)| p.len()).sum();
    let n_raw = raw.len();
    let traces: Vec<Trace> = raw
        .par_iter()
        .filter(|(_, p)| !p.is_empty())
        .map(|(id, p)| calibrate_trace(id.clone(), p, anchors))
        .collect::<crate::Result<_>>()?;
    let traces = filter_min_points(traces, cfg.data.min_points);
    Ok((traces, n_raw, raw_points))
}

fn ingest(cfg: &RunConfig) -> CliResult<()> {
    let anchors = load_anchors(cfg)?;
    let (traces, n_raw, raw_points) = ingest_raw(cfg, &anchors)?;
    write_traces(&out(cfg, "traces.csv"), &traces)?;
    let points: usize = traces.iter().map(Trace::len).sum();
    println!(
        "{}",
        render(
            &["objects_in", "objects_kept", "raw_points", "calibrated_points"],
            &[vec![n_raw.to_string(), traces.len().to_string(), raw_points.to_string(), points.to_string()]],
        )
    );
    Ok(())
}

fn write_split(cfg: &RunConfig, s: &SplitOutput) -> CliResult<(Vec<Trace>, Vec<Trace>)> {
    let (query, reference) = s.for_linking();
    write_traces(&out(cfg, "query.csv"), &query)?;
    write_traces(&out(cfg, "reference.csv"), &reference)?;
    write_json(&out(cfg, "split_warnings.json"), &s.warnings)?;
    for w in &s.warnings {
        warn!(
            "object {} has an empty {} half",
            w.object_id,
            if w.empty_query { "query" } else { "reference" }
        );
    }
    Ok((query, reference))
}

fn split(cfg: &RunConfig) -> CliResult<()> {
    let traces = load_traces(&cfg.data.traces, "traces")?;
    let s = split_dataset(&traces, cfg.split_strategy(), cfg.clock())?;
    let (query, reference) = write_split(cfg, &s)?;
    let count = |v: &[Trace]| v.iter().map(Trace::len).sum::<usize>().to_string();
    println!(
        "{}",
        render(
            &["half", "objects", "points"],
            &[
                vec!["query".into(), query.len().to_string(), count(&query)],
                vec!["reference".into(), reference.len().to_string(), count(&reference)],
            ],
        )
    );
    if !s.warnings.is_empty() {
        println!("{} objects flagged with an empty half and left out of the query set", s.warnings.len());
    }
    Ok(())
}

type Named = (String, Signature);

/// Full signatures for both halves; the model is fitted on the reference.
fn build_signatures<'a>(
    cfg: &RunConfig,
    query: &[Trace],
    reference: &[Trace],
    anchors: &'a AnchorSet,
) -> CliResult<(SignatureModel<'a>, Vec<Named>, Vec<Named>)> {
    let model = SignatureModel::fit(reference, cfg.signature_spec(), anchors, cfg.clock())?;
    let d = model.signatures(reference, UnknownDims::Error)?;
    let q = model.signatures(query, UnknownDims::Skip)?;
    write_signature_files(cfg, &model, &q, &d)?;
    Ok((model, q, d))
}

fn write_signature_files(
    cfg: &RunConfig,
    model: &SignatureModel<'_>,
    q: &[(String, Signature)],
    d: &[(String, Signature)],
) -> CliResult<()> {
    save_records(&out(cfg, "query.sig.jsonl"), &to_records(q, None))?;
    save_records(&out(cfg, "reference.sig.jsonl"), &to_records(d, None))?;
    if let Some(v) = model.vocabulary() {
        write_json(&out(cfg, "vocab.json"), v)?;
    }
    Ok(())
}

fn signature(cfg: &RunConfig) -> CliResult<()> {
    let anchors = load_anchors(cfg)?;
    let query = load_traces(&cfg.data.query, "query")?;
    let reference = load_traces(&cfg.data.reference, "reference")?;
    let (model, q, d) = build_signatures(cfg, &query, &reference, &anchors)?;
    let mean = |v: &[(String, Signature)]| {
        let n = v.len().max(1) as f64;
        f4(v.iter().map(|(_, s)| s.len()).sum::<usize>() as f64 / n)
    };
    let empty = |v: &[(String, Signature)]| v.iter().filter(|(_, s)| s.is_empty()).count().to_string();
    println!("kind: {}", model.kind());
    println!(
        "{}",
        render(
            &["half", "objects", "mean_dims", "empty"],
            &[
                vec!["query".into(), q.len().to_string(), mean(&q), empty(&q)],
                vec!["reference".into(), d.len().to_string(), mean(&d), empty(&d)],
            ],
        )
    );
    Ok(())
}

fn reduce_records(records: &[SignatureRecord], m: usize, renormalize: bool) -> CliResult<Vec<SignatureRecord>> {
    records
        .par_iter()
        .map(|r| {
            let sig = r.signature();
            let reduced = if sig.is_empty() { sig } else { cut_reduce_with(&sig, m, renormalize)? };
            Ok(SignatureRecord::new(r.object_id.clone(), &reduced, Some(m)))
        })
        .collect()
}

fn reduce(cfg: &RunConfig) -> CliResult<()> {
    let m = cfg
        .cut_m()
        .ok_or_else(|| CliError::Config("reduce needs reduction.method = \"cut\"".into()))?;
    let inputs = [
        (&cfg.data.query_signatures, "query"),
        (&cfg.data.reference_signatures, "reference"),
    ];
    if inputs.iter().all(|(p, _)| p.is_none()) {
        return Err(CliError::Config(
            "missing input: data.query_signatures or data.reference_signatures".into(),
        ));
    }
    let mut rows = Vec::new();
    for (path, half) in inputs {
        if path.is_none() {
            continue;
        }
        let records = load_records(path, &format!("{half}_signatures"))?;
        let reduced = reduce_records(&records, m, cfg.reduction.renormalize)?;
        save_records(&out(cfg, &format!("{half}.reduced.jsonl")), &reduced)?;
        let dims = |v: &[SignatureRecord]| v.iter().map(|r| r.entries.len()).sum::<usize>().to_string();
        rows.push(vec![half.to_string(), records.len().to_string(), dims(&records), dims(&reduced)]);
    }
    println!("{}", render(&["half", "objects", "dims_before", "dims_after"], &rows));
    Ok(())
}

#[derive(Serialize)]
struct IndexSummary {
    objects: usize,
    nodes: usize,
    height: usize,
    capacity: usize,
    aggregate_entries: usize,
    valid: bool,
    violations: Vec<String>,
}

fn summarize(tree: &WrTree) -> IndexSummary {
    let report = validate(tree);
    IndexSummary {
        objects: report.objects,
        nodes: report.nodes,
        height: report.height,
        capacity: tree.capacity(),
        aggregate_entries: tree.aggregate_entries(),
        valid: report.is_valid(),
        violations: report.violations.iter().map(ToString::to_string).collect(),
    }
}

fn print_index(s: &IndexSummary, extra: &[(&str, String)]) {
    let mut headers = vec!["objects", "nodes", "height", "capacity", "valid"];
    let mut row = vec![
        s.objects.to_string(),
        s.nodes.to_string(),
        s.height.to_string(),
        s.capacity.to_string(),
        s.valid.to_string(),
    ];
    for (h, v) in extra {
        headers.push(h);
        row.push(v.clone());
    }
    println!("{}", render(&headers, &[row]));
}

fn index_build(cfg: &RunConfig) -> CliResult<()> {
    let anchors = load_anchors(cfg)?;
    let vocab = load_vocab(cfg)?;
    let records = load_records(&cfg.data.reference_signatures, "reference_signatures")?;
    let support = Support::for_kind(kind_of(&records, "reference signatures")?, &anchors, vocab.as_ref())?;
    let set = records_to_objects(&records, &support)?;
    for id in &set.unsignable {
        warn!("reference object {id} has an empty signature and is not indexed");
    }
    let start = Instant::now();
    let tree = bulk_load(set.objects, cfg.index.capacity)?;
    let secs = start.elapsed().as_secs_f64();
    save_tree(&tree, &out(cfg, "index.wrt"))?;
    let summary = summarize(&tree);
    write_json(&out(cfg, "validation.json"), &summary)?;
    print_index(&summary, &[("build_secs", f4(secs))]);
    Ok(())
}

fn index_insert(cfg: &RunConfig) -> CliResult<()> {
    let anchors = load_anchors(cfg)?;
    let vocab = load_vocab(cfg)?;
    let path = RunConfig::require(&cfg.data.index, "index")?;
    let mut tree = load_index(path)?;
    let records = load_records(&cfg.data.insert_signatures, "insert_signatures")?;
    let kind = kind_of(&records, "insert signatures")?;
    if let Some(o) = tree.objects().first() {
        check_kind(o.signature.kind(), kind)?;
    }
    let support = Support::for_kind(kind, &anchors, vocab.as_ref())?;
    let set = records_to_objects(&records, &support)?;
    for id in &set.unsignable {
        warn!("object {id} has an empty signature and is not inserted");
    }
    let n = set.objects.len();
    let start = Instant::now();
    for o in set.objects {
        tree.insert(o)?;
    }
    let secs = start.elapsed().as_secs_f64();
    save_tree(&tree, &out(cfg, "index.wrt"))?;
    let summary = summarize(&tree);
    write_json(&out(cfg, "validation.json"), &summary)?;
    let per = if n == 0 { 0.0 } else { secs / n as f64 };
    print_index(&summary, &[("inserted", n.to_string()), ("secs_per_insert", format!("{per:.6}"))]);
    Ok(())
}

fn index_validate(cfg: &RunConfig) -> CliResult<()> {
    let path = RunConfig::require(&cfg.data.index, "index")?;
    let tree = load_index(path)?;
    let summary = summarize(&tree);
    write_json(&out(cfg, "validation.json"), &summary)?;
    print_index(&summary, &[]);
    for v in &summary.violations {
        println!("violation: {v}");
    }
    if !summary.valid {
        return Err(crate::Error::Format(format!("index has {} violations", summary.violations.len())).into());
    }
    Ok(())
}

fn acc_table(columns: &[(&str, &BTreeMap<usize, f64>)]) -> String {
    let ks: Vec<usize> = columns
        .iter()
        .flat_map(|(_, c)| c.keys().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut headers = vec!["k"];
    headers.extend(columns.iter().map(|(h, _)| *h));
    let rows: Vec<Vec<String>> = ks
        .iter()
        .map(|k| {
            let mut row = vec![k.to_string()];
            row.extend(columns.iter().map(|(_, c)| c.get(k).map(|v| f4(*v)).unwrap_or_default()));
            row
        })
        .collect();
    render(&headers, &rows)
}

fn save_run(cfg: &RunConfig, run: &LinkingRun, name: &str) -> CliResult<()> {
    let mut w = create(&out(cfg, name))?;
    write_results(run, &mut w)?;
    w.flush()?;
    Ok(())
}

fn link(cfg: &RunConfig) -> CliResult<()> {
    let anchors = load_anchors(cfg)?;
    let vocab = load_vocab(cfg)?;
    let q_records = load_records(&cfg.data.query_signatures, "query_signatures")?;
    let kind = kind_of(&q_records, "query signatures")?;
    let m = q_records.first().and_then(|r| r.reduced_m);
    let support = Support::for_kind(kind, &anchors, vocab.as_ref())?;
    let queries = records_to_objects(&q_records, &support)?;

    let engine = cfg.link.engine;
    let start = Instant::now();
    let index = match (&cfg.data.index, engine) {
        (Some(path), Engine::Wrtree) => {
            info!("loading index {}", path.display());
            LinkIndex::Wrtree(load_index(path)?)
        }
        (Some(_), other) => {
            return Err(CliError::Config(format!(
                "data.index holds a WR-tree but link.engine is {other}"
            )))
        }
        (None, _) => {
            let d_records = load_records(&cfg.data.reference_signatures, "reference_signatures")?;
            check_kind(kind, kind_of(&d_records, "reference signatures")?)?;
            let refs = records_to_objects(&d_records, &support)?;
            LinkIndex::build(engine, refs.objects, &cfg.index_options())?
        }
    };
    if let Some(k) = index.kind() {
        check_kind(kind, k)?;
    }
    let build_secs = start.elapsed().as_secs_f64();
    let mut run = link_all(&queries, &index, engine, cfg.link.k, m)?;
    run.timings.build_secs = build_secs;
    save_run(cfg, &run, "results.csv")?;
    let metrics = Metrics::from_run(&run, cfg.seed, index.len());
    write_json(&out(cfg, "metrics.json"), &metrics)?;
    println!("{}", acc_table(&[(engine.name(), &metrics.acc)]));
    println!(
        "build {:.4}s  link {:.4}s  mean query {:.6}s",
        run.timings.build_secs, run.timings.link_secs, run.timings.mean_query_secs
    );
    Ok(())
}

/// Reads a results file as a run; queries listed in `query_ids` without
/// any candidate count as misses.
fn load_run(cfg: &RunConfig, path: &Option<PathBuf>, what: &str, query_ids: &[String]) -> CliResult<LinkingRun> {
    let path = RunConfig::require(path, what)?;
    let mut run = LinkingRun::new(cfg.link.engine, cfg.link.k, cfg.cut_m());
    run.results = read_results(open(path)?)?;
    for q in query_ids {
        run.results.entry(q.clone()).or_default();
    }
    Ok(run)
}

fn query_ids(cfg: &RunConfig) -> CliResult<Vec<String>> {
    match &cfg.data.query_signatures {
        Some(_) => Ok(load_records(&cfg.data.query_signatures, "query_signatures")?
            .into_iter()
            .map(|r| r.object_id)
            .collect()),
        None => Ok(Vec::new()),
    }
}

#[derive(Serialize)]
struct EvalReport {
    queries: usize,
    acc: BTreeMap<usize, f64>,
}

fn eval(cfg: &RunConfig) -> CliResult<()> {
    let ids = query_ids(cfg)?;
    let run = load_run(cfg, &cfg.data.results, "results", &ids)?;
    let report = EvalReport {
        queries: run.len(),
        acc: accuracy_curve(&run, cfg.link.k),
    };
    write_json(&out(cfg, "eval.json"), &report)?;
    println!("{}", acc_table(&[("acc", &report.acc)]));
    Ok(())
}

fn signature_map(records: Vec<SignatureRecord>) -> HashMap<String, Signature> {
    records.into_iter().map(|r| (r.object_id.clone(), r.signature())).collect()
}

#[derive(Serialize)]
struct RerankReport {
    before: BTreeMap<usize, f64>,
    after: BTreeMap<usize, f64>,
}

fn rerank_cmd(cfg: &RunConfig) -> CliResult<()> {
    let ids = query_ids(cfg)?;
    let run = load_run(cfg, &cfg.data.results, "results", &ids)?;
    let q = signature_map(load_records(&cfg.data.query_large_signatures, "query_large_signatures")?);
    let d = signature_map(load_records(
        &cfg.data.reference_large_signatures,
        "reference_large_signatures",
    )?);
    let reranked = rerank(&run, &q, &d)?;
    save_run(cfg, &reranked, "results.reranked.csv")?;
    let report = RerankReport {
        before: accuracy_curve(&run, cfg.link.k),
        after: accuracy_curve(&reranked, cfg.link.k),
    };
    write_json(&out(cfg, "rerank.json"), &report)?;
    println!("{}", acc_table(&[("before", &report.before), ("after", &report.after)]));
    Ok(())
}

#[derive(Serialize)]
struct MarriageReport<'a> {
    accuracy: f64,
    matched: usize,
    fallbacks: usize,
    proposals: usize,
    unassigned: &'a [String],
    collisions: &'a [String],
    blocking_pairs: usize,
}

fn write_marriage(cfg: &RunConfig, m: &Marriage, forward: &LinkingRun, backward: &LinkingRun) -> CliResult<f64> {
    let mut w = csv::Writer::from_writer(create(&out(cfg, "marriage.csv"))?);
    w.write_record(["query_id", "candidate_id", "similarity", "fallback"])
        .map_err(crate::Error::from)?;
    for (q, a) in &m.assignments {
        w.write_record([q.as_str(), &a.candidate, &a.similarity.to_string(), &a.fallback.to_string()])
            .map_err(crate::Error::from)?;
    }
    w.flush()?;
    let fallbacks = m.assignments.values().filter(|a| a.fallback).count();
    let report = MarriageReport {
        accuracy: m.accuracy(),
        matched: m.assignments.len() - fallbacks,
        fallbacks,
        proposals: m.proposals,
        unassigned: &m.unassigned,
        collisions: &m.collisions,
        blocking_pairs: blocking_pairs(m, forward, backward).len(),
    };
    write_json(&out(cfg, "marriage.json"), &report)?;
    println!(
        "{}",
        render(
            &["accuracy", "matched", "fallbacks", "collisions", "blocking_pairs"],
            &[vec![
                f4(report.accuracy),
                report.matched.to_string(),
                fallbacks.to_string(),
                m.collisions.len().to_string(),
                report.blocking_pairs.to_string(),
            ]],
        )
    );
    Ok(report.accuracy)
}

fn marriage_options(cfg: &RunConfig) -> MarriageOptions {
    MarriageOptions {
        paper_literal_rank: cfg.link.paper_literal_rank,
    }
}

fn marry(cfg: &RunConfig) -> CliResult<()> {
    let ids = query_ids(cfg)?;
    let forward = load_run(cfg, &cfg.data.results, "results", &ids)?;
    let backward = load_run(cfg, &cfg.data.backward_results, "backward_results", &[])?;
    let m = stable_marriage(&forward, &backward, marriage_options(cfg));
    write_marriage(cfg, &m, &forward, &backward)?;
    Ok(())
}

/// Traces from `data.traces`, from `data.raw` via ingest, or generated.
/// Newly produced anchors and traces are written to the output dir.
fn obtain_corpus(cfg: &RunConfig) -> CliResult<(AnchorSet, Vec<Trace>)> {
    if cfg.data.traces.is_some() {
        let anchors = load_anchors(cfg)?;
        let traces = filter_min_points(load_traces(&cfg.data.traces, "traces")?, cfg.data.min_points);
        return Ok((anchors, traces));
    }
    if cfg.data.raw.is_some() {
        let anchors = load_anchors(cfg)?;
        let (traces, _, _) = ingest_raw(cfg, &anchors)?;
        write_traces(&out(cfg, "traces.csv"), &traces)?;
        return Ok((anchors, traces));
    }
    info!("no input traces given; generating {} synthetic objects", cfg.synthetic.n_objects);
    let data = generate_synthetic(&cfg.synthetic)?;
    let mut w = create(&out(cfg, "anchors.csv"))?;
    write_anchors(&mut w, &data.anchors)?;
    w.flush()?;
    write_traces(&out(cfg, "traces.csv"), &data.traces)?;
    Ok((data.anchors, data.traces))
}

fn closure(cfg: &RunConfig) -> CliResult<()> {
    let (anchors, traces) = obtain_corpus(cfg)?;
    let ccfg = ClosureConfig {
        m: cfg.closure.m,
        rounds: cfg.closure.rounds,
        split: cfg.split_strategy(),
        link: cfg.link_config(),
        grids: cfg.grids(),
    };
    let (closed, report) = signature_closure(&traces, &anchors, &ccfg)?;
    write_json(&out(cfg, "closure.json"), &report)?;
    let mut w = create(&out(cfg, "closure.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    write_traces(&out(cfg, "traces.closed.csv"), &closed)?;
    println!("{}", closure_table(&report));
    Ok(())
}

fn closure_table(report: &ClosureReport) -> String {
    let rows: Vec<Vec<String>> = report
        .rounds
        .iter()
        .map(|r| {
            vec![
                r.round.to_string(),
                f4(r.acc1()),
                f4(r.utility.data_remain),
                f4(r.utility.mbr_overlap),
                f4(r.utility.grid_coverage_large),
                f4(r.utility.grid_coverage_small),
                r.emptied.len().to_string(),
            ]
        })
        .collect();
    render(
        &["round", "acc@1", "data_remain", "mbr_overlap", "cover_large", "cover_small", "emptied"],
        &rows,
    )
}

#[derive(Debug, Clone, Serialize)]
struct BenchRow {
    engine: Engine,
    n: usize,
    build_secs: f64,
    link_secs: f64,
    mean_query_secs: f64,
    acc1: f64,
    speedup: Option<f64>,
}

fn bench(cfg: &RunConfig) -> CliResult<()> {
    let link_cfg = cfg.link_config();
    let mut rows: Vec<BenchRow> = Vec::new();
    for &n in &cfg.bench.sizes {
        let mut syn = cfg.synthetic.clone();
        syn.n_objects = n;
        let data = generate_synthetic(&syn)?;
        let s = split_dataset(&data.traces, cfg.split_strategy(), cfg.clock())?;
        let (query, reference) = s.for_linking();
        let halves = prepare_halves(&query, &reference, &data.anchors, &link_cfg)?;
        let mut linear_secs = None;
        let first = rows.len();
        for &engine in &cfg.bench.engines {
            info!("bench n={n} engine={engine}");
            let start = Instant::now();
            let index = LinkIndex::build(engine, halves.reference.objects.clone(), &link_cfg.index)?;
            let build_secs = start.elapsed().as_secs_f64();
            let run = link_all(&halves.query, &index, engine, link_cfg.k, link_cfg.m)?;
            if engine == Engine::Linear {
                linear_secs = Some(run.timings.link_secs);
            }
            rows.push(BenchRow {
                engine,
                n,
                build_secs,
                link_secs: run.timings.link_secs,
                mean_query_secs: run.timings.mean_query_secs,
                acc1: crate::linking::accuracy_at_k(&run, 1),
                speedup: None,
            });
        }
        if let Some(base) = linear_secs {
            for r in &mut rows[first..] {
                r.speedup = Some(base / r.link_secs.max(f64::MIN_POSITIVE));
            }
        }
    }
    let mut w = csv::Writer::from_writer(create(&out(cfg, "bench.csv"))?);
    for r in &rows {
        w.serialize(r).map_err(crate::Error::from)?;
    }
    w.flush()?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.engine.to_string(),
                r.n.to_string(),
                f4(r.build_secs),
                f4(r.link_secs),
                format!("{:.6}", r.mean_query_secs),
                f4(r.acc1),
                r.speedup.map(|s| format!("{s:.2}")).unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    println!(
        "{}",
        render(&["engine", "n", "build_s", "link_s", "query_s", "acc@1", "speedup"], &table)
    );
    Ok(())
}

#[derive(Serialize)]
struct PipelineMetrics {
    #[serde(flatten)]
    metrics: Metrics,
    signature: SignatureType,
    signature_secs: f64,
    unsignable_queries: usize,
    unsignable_references: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rerank_acc: Option<BTreeMap<usize, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    marriage_accuracy: Option<f64>,
}

fn pipeline(cfg: &RunConfig) -> CliResult<()> {
    let (anchors, traces) = obtain_corpus(cfg)?;
    let s = split_dataset(&traces, cfg.split_strategy(), cfg.clock())?;
    let (query, reference) = write_split(cfg, &s)?;

    let start = Instant::now();
    let (model, q_full, d_full) = build_signatures(cfg, &query, &reference, &anchors)?;
    let m = cfg.cut_m();
    let support = model.support();
    let queries = prepare_objects(q_full.clone(), m, cfg.reduction.renormalize, &support)?;
    let refs = prepare_objects(d_full.clone(), m, cfg.reduction.renormalize, &support)?;
    let signature_secs = start.elapsed().as_secs_f64();
    if m.is_some() {
        save_records(&out(cfg, "query.reduced.jsonl"), &object_records(&queries, model.kind(), m))?;
        save_records(&out(cfg, "reference.reduced.jsonl"), &object_records(&refs, model.kind(), m))?;
    }

    let engine = cfg.link.engine;
    let start = Instant::now();
    let index = LinkIndex::build(engine, refs.objects.clone(), &cfg.index_options())?;
    let build_secs = start.elapsed().as_secs_f64();
    if let LinkIndex::Wrtree(tree) = &index {
        save_tree(tree, &out(cfg, "index.wrt"))?;
    }
    let mut run = link_all(&queries, &index, engine, cfg.link.k, m)?;
    run.timings.build_secs = build_secs;
    save_run(cfg, &run, "results.csv")?;

    let rerank_acc = match cfg.link.rerank_m {
        Some(big) => {
            let enlarge = |v: &[(String, Signature)]| -> CliResult<HashMap<String, Signature>> {
                v.par_iter()
                    .filter(|(_, s)| !s.is_empty())
                    .map(|(id, s)| Ok((id.clone(), cut_reduce_with(s, big, cfg.reduction.renormalize)?)))
                    .collect()
            };
            let reranked = rerank(&run, &enlarge(&q_full)?, &enlarge(&d_full)?)?;
            save_run(cfg, &reranked, "results.reranked.csv")?;
            Some(accuracy_curve(&reranked, cfg.link.k))
        }
        None => None,
    };

    let marriage_accuracy = if cfg.link.stable_marriage {
        let backward_index = LinkIndex::build(engine, queries.objects.clone(), &cfg.index_options())?;
        let backward = link_all(&refs, &backward_index, engine, cfg.link.k, m)?;
        save_run(cfg, &backward, "results.backward.csv")?;
        let marriage = stable_marriage(&run, &backward, marriage_options(cfg));
        Some(write_marriage(cfg, &marriage, &run, &backward)?)
    } else {
        None
    };

    let metrics = PipelineMetrics {
        metrics: Metrics::from_run(&run, cfg.seed, refs.len()),
        signature: cfg.signature.kind,
        signature_secs,
        unsignable_queries: queries.unsignable.len(),
        unsignable_references: refs.unsignable.len(),
        rerank_acc,
        marriage_accuracy,
    };
    write_json(&out(cfg, "metrics.json"), &metrics)?;

    let mut summary = format!(
        "engine {engine}  signature {}  m {}  k {}  queries {}  references {}\n\n",
        model.kind(),
        m.map(|m| m.to_string()).unwrap_or_else(|| "full".into()),
        cfg.link.k,
        run.len(),
        refs.len(),
    );
    let mut columns = vec![("acc", &metrics.metrics.acc)];
    if let Some(r) = &metrics.rerank_acc {
        columns.push(("reranked", r));
    }
    summary.push_str(&acc_table(&columns));
    if let Some(a) = marriage_accuracy {
        summary.push_str(&format!("\nstable marriage accuracy {a:.4}\n"));
    }
    summary.push_str(&format!(
        "\nsignatures {:.4}s  build {:.4}s  link {:.4}s  mean query {:.6}s\n",
        signature_secs, run.timings.build_secs, run.timings.link_secs, run.timings.mean_query_secs
    ));
    std::fs::write(out(cfg, "summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{
    apply_synthetic_overrides, Metric, ReductionMethod, RunConfig, SignatureType, SplitMethod,
};
use super::CliError;
use crate::linking::Engine;

#[derive(Debug, Parser)]
#[command(name = "trajlink", version, about = "Link moving objects across datasets by their movement signatures")]
pub struct Cli {
    /// TOML config file; flags override it.
    #[arg(long, short = 'c', global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with planted identities.
    Synth,
    /// Snap raw GPS points to anchors.
    Ingest,
    /// Split calibrated traces into query and reference halves by day.
    Split,
    /// Build signatures for both halves.
    Signature,
    /// CUT-reduce signature files.
    Reduce,
    /// Build, extend or check a WR-tree index file.
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Top-k search of query signatures against the reference side.
    Link,
    /// Accuracy of a results file.
    Eval,
    /// Re-order a results file with larger signatures.
    Rerank,
    /// One-to-one matching from forward and backward results.
    Marry,
    /// Iterative suppression of each object's top signature points.
    Closure,
    /// Build and link timings per engine and corpus size.
    Bench,
    /// Ingest through scoring in one run.
    Pipeline,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum IndexAction {
    Build,
    Insert,
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Ingest => "ingest",
            Command::Split => "split",
            Command::Signature => "signature",
            Command::Reduce => "reduce",
            Command::Index { action: IndexAction::Build } => "index build",
            Command::Index { action: IndexAction::Insert } => "index insert",
            Command::Index { action: IndexAction::Validate } => "index validate",
            Command::Link => "link",
            Command::Eval => "eval",
            Command::Rerank => "rerank",
            Command::Marry => "marry",
            Command::Closure => "closure",
            Command::Bench => "bench",
            Command::Pipeline => "pipeline",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Generator settings as key=value pairs, e.g. `n=500,seed=3`.
    #[arg(long, global = true)]
    pub synthetic: Option<String>,
    /// Also write jittered raw points from `synth`.
    #[arg(long, global = true)]
    pub write_raw: bool,

    #[arg(long, global = true)]
    pub raw: Option<PathBuf>,
    #[arg(long, global = true)]
    pub anchors: Option<PathBuf>,
    #[arg(long, global = true)]
    pub traces: Option<PathBuf>,
    #[arg(long, global = true)]
    pub query: Option<PathBuf>,
    #[arg(long, global = true)]
    pub reference: Option<PathBuf>,
    #[arg(long = "query-sigs", global = true)]
    pub query_signatures: Option<PathBuf>,
    #[arg(long = "reference-sigs", global = true)]
    pub reference_signatures: Option<PathBuf>,
    #[arg(long = "query-large-sigs", global = true)]
    pub query_large_signatures: Option<PathBuf>,
    #[arg(long = "reference-large-sigs", global = true)]
    pub reference_large_signatures: Option<PathBuf>,
    #[arg(long = "insert-sigs", global = true)]
    pub insert_signatures: Option<PathBuf>,
    #[arg(long, global = true)]
    pub vocab: Option<PathBuf>,
    #[arg(long, global = true)]
    pub index: Option<PathBuf>,
    #[arg(long, global = true)]
    pub results: Option<PathBuf>,
    #[arg(long = "backward-results", global = true)]
    pub backward_results: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long, global = true)]
    pub min_points: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub utc_offset: Option<f64>,

    #[arg(long = "split", global = true, value_enum)]
    pub split_method: Option<SplitArg>,
    #[arg(long, global = true)]
    pub q_days: Option<usize>,

    #[arg(long = "signature-type", global = true, value_enum)]
    pub signature_type: Option<SignatureArg>,
    /// Gram length for sequential signatures.
    #[arg(long, global = true)]
    pub q: Option<usize>,
    #[arg(long, global = true)]
    pub grid: Option<u32>,
    /// Time interval in hours for spatiotemporal signatures.
    #[arg(long = "dt", global = true, allow_negative_numbers = true)]
    pub dt_hours: Option<f64>,

    #[arg(long, global = true, value_enum)]
    pub reduction: Option<ReductionArg>,
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub no_renormalize: bool,

    #[arg(long, global = true)]
    pub capacity: Option<usize>,
    #[arg(long, global = true)]
    pub lsh_planes: Option<usize>,

    #[arg(long, global = true, value_parser = clap::value_parser!(Engine))]
    pub engine: Option<Engine>,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub rerank_m: Option<usize>,
    #[arg(long, global = true)]
    pub stable_marriage: bool,
    #[arg(long, global = true)]
    pub paper_literal_rank: bool,

    #[arg(long, global = true)]
    pub closure_m: Option<usize>,
    #[arg(long, global = true)]
    pub rounds: Option<usize>,

    /// Comma-separated engines for `bench`.
    #[arg(long, global = true, value_delimiter = ',', value_parser = clap::value_parser!(Engine))]
    pub engines: Option<Vec<Engine>>,
    /// Comma-separated corpus sizes for `bench`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum MetricArg {
    Haversine,
    Planar,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SplitArg {
    Interleaved,
    Random,
    Serial,
    WeekdayWeekend,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SignatureArg {
    Spatial,
    Sequential,
    Spatiotemporal,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ReductionArg {
    Cut,
    None,
}

macro_rules! set {
    ($target:expr, $value:expr) => {
        if let Some(v) = $value {
            $target = v;
        }
    };
    ($target:expr, some $value:expr) => {
        if let Some(v) = $value {
            $target = Some(v);
        }
    };
}

impl Overrides {
    /// Writes every given flag into `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        set!(cfg.output, self.out.clone());
        set!(cfg.threads, self.threads);
        set!(cfg.seed, self.seed);
        if let Some(spec) = &self.synthetic {
            apply_synthetic_overrides(&mut cfg.synthetic, spec)?;
        }
        cfg.synth.write_raw |= self.write_raw;

        let d = &mut cfg.data;
        set!(d.raw, some self.raw.clone());
        set!(d.anchors, some self.anchors.clone());
        set!(d.traces, some self.traces.clone());
        set!(d.query, some self.query.clone());
        set!(d.reference, some self.reference.clone());
        set!(d.query_signatures, some self.query_signatures.clone());
        set!(d.reference_signatures, some self.reference_signatures.clone());
        set!(d.query_large_signatures, some self.query_large_signatures.clone());
        set!(d.reference_large_signatures, some self.reference_large_signatures.clone());
        set!(d.insert_signatures, some self.insert_signatures.clone());
        set!(d.vocab, some self.vocab.clone());
        set!(d.index, some self.index.clone());
        set!(d.results, some self.results.clone());
        set!(d.backward_results, some self.backward_results.clone());
        set!(d.min_points, self.min_points);
        set!(d.utc_offset_hours, self.utc_offset);
        if let Some(m) = self.metric {
            d.metric = match m {
                MetricArg::Haversine => Metric::Haversine,
                MetricArg::Planar => Metric::Planar,
            };
        }

        if let Some(s) = self.split_method {
            cfg.split.method = match s {
                SplitArg::Interleaved => SplitMethod::Interleaved,
                SplitArg::Random => SplitMethod::Random,
                SplitArg::Serial => SplitMethod::Serial,
                SplitArg::WeekdayWeekend => SplitMethod::WeekdayWeekend,
            };
        }
        set!(cfg.split.q_days, self.q_days);

        if let Some(s) = self.signature_type {
            cfg.signature.kind = match s {
                SignatureArg::Spatial => SignatureType::Spatial,
                SignatureArg::Sequential => SignatureType::Sequential,
                SignatureArg::Spatiotemporal => SignatureType::Spatiotemporal,
            };
        }
        set!(cfg.signature.q, self.q);
        set!(cfg.signature.grid, self.grid);
        set!(cfg.signature.dt_hours, self.dt_hours);

        if let Some(r) = self.reduction {
            cfg.reduction.method = match r {
                ReductionArg::Cut => ReductionMethod::Cut,
                ReductionArg::None => ReductionMethod::None,
            };
        }
        set!(cfg.reduction.m, self.m);
        if self.no_renormalize {
            cfg.reduction.renormalize = false;
        }

        set!(cfg.index.capacity, self.capacity);
        set!(cfg.index.lsh_planes, self.lsh_planes);

        set!(cfg.link.engine, self.engine);
        set!(cfg.link.k, self.k);
        set!(cfg.link.rerank_m, some self.rerank_m);
        cfg.link.stable_marriage |= self.stable_marriage;
        cfg.link.paper_literal_rank |= self.paper_literal_rank;

        set!(cfg.closure.m, self.closure_m);
        set!(cfg.closure.rounds, self.rounds);
        set!(cfg.bench.engines, self.engines.clone());
        set!(cfg.bench.sizes, self.sizes.clone());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let cli = Cli::try_parse_from([
            "trajlink", "pipeline", "--synthetic", "n=50", "--engine", "linear", "--m", "7", "--k", "3",
        ])
        .unwrap();
        let mut cfg = RunConfig::from_toml("[link]\nengine = 'wrtree'\nk = 9").unwrap();
        cli.overrides.apply(&mut cfg).unwrap();
        assert_eq!(cfg.link.engine, Engine::Linear);
        assert_eq!((cfg.link.k, cfg.reduction.m, cfg.synthetic.n_objects), (3, 7, 50));
        assert_eq!(cli.command.name(), "pipeline");
    }

    #[test]
    fn lists_and_subcommands() {
        let cli = Cli::try_parse_from([
            "trajlink", "index", "validate", "--engines", "linear,wrtree", "--sizes", "10,20",
        ])
        .unwrap();
        let mut cfg = RunConfig::default();
        cli.overrides.apply(&mut cfg).unwrap();
        assert_eq!(cfg.bench.engines, vec![Engine::Linear, Engine::Wrtree]);
        assert_eq!(cfg.bench.sizes, vec![10, 20]);
        assert_eq!(cli.command.name(), "index validate");
    }
}

//! Run configuration, read from TOML. Every section and key is optional.
//!
//! ```toml
//! seed = 0
//! threads = 0            # 0 = all cores
//! output = "out"
//!
//! [data]                 # input files; which ones matter depends on the verb
//! raw = "raw.csv"
//! anchors = "anchors.csv"
//! traces = "traces.csv"
//! metric = "haversine"   # or "planar"
//! utc_offset_hours = 8.0
//! min_points = 1
//!
//! [synthetic]            # generator settings, used when no trace files are given
//! n_objects = 500
//!
//! [split]
//! method = "interleaved" # interleaved | random | serial | weekday_weekend
//! q_days = 15
//!
//! [signature]
//! type = "spatial"       # spatial | sequential | spatiotemporal
//! q = 2
//! grid = 32
//! dt_hours = 2.0
//!
//! [reduction]
//! method = "cut"         # cut | none
//! m = 10
//! renormalize = true
//!
//! [index]
//! capacity = 32
//! lsh_planes = 64
//!
//! [link]
//! engine = "wrtree"      # linear | rtree | wrtree | lsh
//! k = 5
//! rerank_m = 100         # optional
//! stable_marriage = false
//! paper_literal_rank = false
//!
//! [closure]
//! m = 10
//! rounds = 5
//! grid_large_m = 423.0
//! grid_small_m = 85.0
//!
//! [bench]
//! engines = ["linear", "wrtree"]
//! sizes = [1000]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::linking::{Engine, IndexOptions, LinkConfig, SignatureSpec};
use crate::privacy::UtilityGrids;
use crate::signatures::bins_for;
use crate::trace_model::{DistanceMetric, LocalClock, SplitStrategy, SyntheticConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub output: PathBuf,
    pub data: DataConfig,
    pub synthetic: SyntheticConfig,
    pub synth: SynthOutput,
    pub split: SplitConfig,
    pub signature: SignatureConfig,
    pub reduction: ReductionConfig,
    pub index: IndexConfig,
    pub link: LinkSection,
    pub closure: ClosureSection,
    pub bench: BenchSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: 0,
            output: PathBuf::from("out"),
            data: DataConfig::default(),
            synthetic: SyntheticConfig::default(),
            synth: SynthOutput::default(),
            split: SplitConfig::default(),
            signature: SignatureConfig::default(),
            reduction: ReductionConfig::default(),
            index: IndexConfig::default(),
            link: LinkSection::default(),
            closure: ClosureSection::default(),
            bench: BenchSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub raw: Option<PathBuf>,
    pub anchors: Option<PathBuf>,
    pub traces: Option<PathBuf>,
    pub query: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub query_signatures: Option<PathBuf>,
    pub reference_signatures: Option<PathBuf>,
    pub query_large_signatures: Option<PathBuf>,
    pub reference_large_signatures: Option<PathBuf>,
    pub insert_signatures: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub results: Option<PathBuf>,
    pub backward_results: Option<PathBuf>,
    pub metric: Metric,
    pub utc_offset_hours: f64,
    pub min_points: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            raw: None,
            anchors: None,
            traces: None,
            query: None,
            reference: None,
            query_signatures: None,
            reference_signatures: None,
            query_large_signatures: None,
            reference_large_signatures: None,
            insert_signatures: None,
            vocab: None,
            index: None,
            results: None,
            backward_results: None,
            metric: Metric::Haversine,
            utc_offset_hours: 8.0,
            min_points: 1,
        }
    }
}

impl DataConfig {
    fn inputs(&self) -> [(&'static str, &Option<PathBuf>); 14] {
        [
            ("raw", &self.raw),
            ("anchors", &self.anchors),
            ("traces", &self.traces),
            ("query", &self.query),
            ("reference", &self.reference),
            ("query_signatures", &self.query_signatures),
            ("reference_signatures", &self.reference_signatures),
            ("query_large_signatures", &self.query_large_signatures),
            ("reference_large_signatures", &self.reference_large_signatures),
            ("insert_signatures", &self.insert_signatures),
            ("vocab", &self.vocab),
            ("index", &self.index),
            ("results", &self.results),
            ("backward_results", &self.backward_results),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Haversine,
    Planar,
}

impl From<Metric> for DistanceMetric {
    fn from(m: Metric) -> Self {
        match m {
            Metric::Haversine => DistanceMetric::Haversine,
            Metric::Planar => DistanceMetric::Planar,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthOutput {
    /// Also write jittered raw GPS points.
    pub write_raw: bool,
    pub raw_jitter_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMethod {
    Interleaved,
    Random,
    Serial,
    WeekdayWeekend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub method: SplitMethod,
    pub q_days: usize,
    /// Falls back to the global seed.
    pub seed: Option<u64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            method: SplitMethod::Interleaved,
            q_days: 15,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureType {
    Spatial,
    Sequential,
    Spatiotemporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignatureConfig {
    #[serde(rename = "type")]
    pub kind: SignatureType,
    pub q: usize,
    pub grid: u32,
    pub dt_hours: f64,
}

impl Default for SignatureConfig {
    fn default() -> Self {
        SignatureConfig {
            kind: SignatureType::Spatial,
            q: 2,
            grid: 32,
            dt_hours: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMethod {
    Cut,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReductionConfig {
    pub method: ReductionMethod,
    pub m: usize,
    pub renormalize: bool,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            method: ReductionMethod::Cut,
            m: 10,
            renormalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexConfig {
    pub capacity: usize,
    pub lsh_planes: usize,
    /// Falls back to the global seed.
    pub lsh_seed: Option<u64>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            capacity: crate::wrtree::DEFAULT_CAPACITY,
            lsh_planes: 64,
            lsh_seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub engine: Engine,
    pub k: usize,
    pub rerank_m: Option<usize>,
    pub stable_marriage: bool,
    pub paper_literal_rank: bool,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection {
            engine: Engine::Wrtree,
            k: 5,
            rerank_m: None,
            stable_marriage: false,
            paper_literal_rank: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosureSection {
    pub m: usize,
    pub rounds: usize,
    pub grid_large_m: f64,
    pub grid_small_m: f64,
}

impl Default for ClosureSection {
    fn default() -> Self {
        let g = UtilityGrids::default();
        ClosureSection {
            m: 10,
            rounds: 5,
            grid_large_m: g.large_m,
            grid_small_m: g.small_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub engines: Vec<Engine>,
    pub sizes: Vec<usize>,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            engines: vec![Engine::Linear, Engine::Wrtree],
            sizes: vec![1000],
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable")
    }

    /// Parameter-domain checks shared by every verb.
    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.signature;
        if s.q < 1 {
            return Err(config_err("signature.q must be at least 1"));
        }
        if s.grid < 1 {
            return Err(config_err("signature.grid must be at least 1"));
        }
        if s.kind == SignatureType::Spatiotemporal {
            bins_for(s.dt_hours).map_err(|e| config_err(format!("signature.dt_hours: {e}")))?;
        }
        if self.reduction.m < 1 {
            return Err(config_err("reduction.m must be at least 1"));
        }
        if self.index.capacity < 2 {
            return Err(config_err("index.capacity must be at least 2"));
        }
        if self.index.lsh_planes < 1 {
            return Err(config_err("index.lsh_planes must be at least 1"));
        }
        if self.link.k < 1 {
            return Err(config_err("link.k must be at least 1"));
        }
        if let Some(mr) = self.link.rerank_m {
            if self.reduction.method == ReductionMethod::Cut && mr <= self.reduction.m {
                return Err(config_err("link.rerank_m must exceed reduction.m"));
            }
        }
        if self.closure.m < 1 || self.closure.rounds < 1 {
            return Err(config_err("closure.m and closure.rounds must be at least 1"));
        }
        if !(self.closure.grid_large_m > 0.0 && self.closure.grid_small_m > 0.0) {
            return Err(config_err("closure grid sizes must be positive"));
        }
        if matches!(self.split.method, SplitMethod::Random | SplitMethod::Serial) && self.split.q_days < 1 {
            return Err(config_err("split.q_days must be at least 1"));
        }
        if !(-24.0..=24.0).contains(&self.data.utc_offset_hours) {
            return Err(config_err("data.utc_offset_hours must be within [-24, 24]"));
        }
        let syn = &self.synthetic;
        if syn.n_objects < 1 || syn.n_anchors < 1 || syn.points_per_object < 1 || syn.days < 1 {
            return Err(config_err("synthetic sizes must be at least 1"));
        }
        if !(0.0..=1.0).contains(&syn.roam_fraction) || syn.locality_radius < 0.0 {
            return Err(config_err("synthetic.roam_fraction must be in [0, 1] and locality_radius non-negative"));
        }
        if self.bench.sizes.iter().any(|&n| n < 1) {
            return Err(config_err("bench.sizes must be positive"));
        }
        for (key, path) in self.data.inputs() {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(config_err(format!("data.{key}: {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    /// Checks that a path the verb needs was given and exists.
    pub fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
        let p = path
            .as_deref()
            .ok_or_else(|| config_err(format!("missing input: data.{what}")))?;
        if !p.exists() {
            return Err(config_err(format!("data.{what}: {} does not exist", p.display())));
        }
        Ok(p)
    }

    pub fn clock(&self) -> LocalClock {
        LocalClock::new(self.data.utc_offset_hours)
    }

    pub fn split_strategy(&self) -> SplitStrategy {
        let seed = self.split.seed.unwrap_or(self.seed);
        match self.split.method {
            SplitMethod::Interleaved => SplitStrategy::Interleaved,
            SplitMethod::Random => SplitStrategy::Random {
                seed,
                q_days: self.split.q_days,
            },
            SplitMethod::Serial => SplitStrategy::Serial { q_days: self.split.q_days },
            SplitMethod::WeekdayWeekend => SplitStrategy::WeekdayWeekend,
        }
    }

    pub fn signature_spec(&self) -> SignatureSpec {
        let s = &self.signature;
        match s.kind {
            SignatureType::Spatial => SignatureSpec::Spatial,
            SignatureType::Sequential => SignatureSpec::Sequential { q: s.q },
            SignatureType::Spatiotemporal => SignatureSpec::Spatiotemporal {
                grid: s.grid,
                dt_hours: s.dt_hours,
            },
        }
    }

    pub fn cut_m(&self) -> Option<usize> {
        match self.reduction.method {
            ReductionMethod::Cut => Some(self.reduction.m),
            ReductionMethod::None => None,
        }
    }

    pub fn index_options(&self) -> IndexOptions {
        IndexOptions {
            capacity: self.index.capacity,
            lsh_planes: self.index.lsh_planes,
            lsh_seed: self.index.lsh_seed.unwrap_or(self.seed),
        }
    }

    pub fn link_config(&self) -> LinkConfig {
        LinkConfig {
            signature: self.signature_spec(),
            m: self.cut_m(),
            renormalize: self.reduction.renormalize,
            engine: self.link.engine,
            k: self.link.k,
            index: self.index_options(),
            clock: self.clock(),
        }
    }

    pub fn grids(&self) -> UtilityGrids {
        UtilityGrids {
            large_m: self.closure.grid_large_m,
            small_m: self.closure.grid_small_m,
        }
    }
}

/// Applies `key=value` pairs (comma separated) to a generator config.
pub fn apply_synthetic_overrides(cfg: &mut SyntheticConfig, spec: &str) -> Result<(), CliError> {
    for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| config_err(format!("expected key=value in --synthetic, got '{pair}'")))?;
        let bad = |e: &dyn std::fmt::Display| config_err(format!("--synthetic {key}: {e}"));
        match key.trim() {
            "n" | "n_objects" => cfg.n_objects = value.parse().map_err(|e| bad(&e))?,
            "anchors" | "n_anchors" => cfg.n_anchors = value.parse().map_err(|e| bad(&e))?,
            "points" | "points_per_object" => cfg.points_per_object = value.parse().map_err(|e| bad(&e))?,
            "seed" => cfg.seed = value.parse().map_err(|e| bad(&e))?,
            "radius" | "locality_radius" => cfg.locality_radius = value.parse().map_err(|e| bad(&e))?,
            "roam_factor" => cfg.roam_factor = value.parse().map_err(|e| bad(&e))?,
            "roam_fraction" => cfg.roam_fraction = value.parse().map_err(|e| bad(&e))?,
            "zipf" | "zipf_exponent" => cfg.zipf_exponent = value.parse().map_err(|e| bad(&e))?,
            "days" => cfg.days = value.parse().map_err(|e| bad(&e))?,
            other => return Err(config_err(format!("unknown --synthetic key '{other}'"))),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.link.engine = Engine::Linear;
        c.link.rerank_m = Some(100);
        c.data.anchors = Some("a.csv".into());
        c.signature.kind = SignatureType::Spatiotemporal;
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_toml("[link]\nengin = 'x'"), Err(CliError::Config(_))));
    }

    #[test]
    fn bad_interval_is_config_error() {
        let c = RunConfig::from_toml("[signature]\ntype = 'spatiotemporal'\ndt_hours = 5.0").unwrap();
        let err = c.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("divide 24"), "{err}");
    }

    #[test]
    fn missing_input_file_is_config_error() {
        let mut c = RunConfig::default();
        c.data.traces = Some("/nonexistent/traces.csv".into());
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn synthetic_overrides() {
        let mut s = SyntheticConfig::default();
        apply_synthetic_overrides(&mut s, "n=50, seed=7,points=100").unwrap();
        assert_eq!((s.n_objects, s.seed, s.points_per_object), (50, 7, 100));
        assert!(apply_synthetic_overrides(&mut s, "bogus=1").is_err());
        assert!(apply_synthetic_overrides(&mut s, "n=x").is_err());
    }
}

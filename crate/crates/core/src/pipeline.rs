//! End-to-end driver: coloring → preprocess → tile → prune → embed → verify.
//!
//! The run report is a pure function of the configuration. Wall-clock
//! timings are returned separately so that reports compare byte for byte.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{find_blue_clique, verify_red_cube, CliqueSearch, ColoringOracle, Descriptor, Embedding, SearchMode, Verdict};
use crate::embed::{greedy_embed, CubeStats, EmbedError};
use crate::preprocess::{check_degree_bounds, preprocess, DegreeCheck, FamilyForest, FinderConfig, PreprocessError, Strategy};
use crate::refine::{prune, reprune_count, Certification, PruneError, PrunedAssignment, Removal};
use crate::regime::{Mode, RegimeError, RegimeParams};
use crate::tiling::{audit, AuditItem, Checkpoint, FailureReport, StepOutcome, TilingRun, TilingRunError};
use crate::vset::VertexSet;

/// Environment variable consulted for the thread count when the config
/// leaves it unset.
pub const THREADS_ENV: &str = "CUBERAMSEY_THREADS";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Parse(String),
    #[error(transparent)]
    Regime(#[from] RegimeError),
    #[error("coloring: {0}")]
    Coloring(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineeringConstants {
    /// Size multipliers for levels 1..=s−2.
    pub multipliers: Vec<u64>,
    /// Largest extraction stage for levels 1..=s−2.
    pub codim_max: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpotCheck {
    pub samples: usize,
    pub size: usize,
    pub seed: u64,
}

impl Default for SpotCheck {
    fn default() -> Self {
        SpotCheck {
            samples: 4,
            size: 200,
            seed: 1,
        }
    }
}

fn default_strategy() -> Strategy {
    Strategy::Auto
}

fn default_budget() -> u64 {
    50_000_000
}

fn default_max_steps() -> usize {
    1_000_000
}

/// Run configuration (TOML).
///
/// ```toml
/// s = 3
/// n = 6
/// mode = "paper-exact"          # or "engineering"
/// threads = 8                   # optional
///
/// [coloring]
/// kind = "blue-multipartite"
/// N = 448000
/// parts = 2
/// p = 0.1
/// seed = 42
///
/// [engineering]                 # optional, engineering mode only
/// multipliers = [4]
/// codim_max = [5]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub s: u8,
    pub n: u8,
    pub mode: Mode,
    pub coloring: Descriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engineering: Option<EngineeringConstants>,
    #[serde(default)]
    pub finder: FinderConfig,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    /// Color evaluations per degree check before sampling kicks in.
    #[serde(default = "default_budget")]
    pub degree_check_budget: u64,
    #[serde(default)]
    pub spot_check: SpotCheck,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Worker threads; not part of the report.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

impl PipelineConfig {
    pub fn new(s: u8, n: u8, mode: Mode, coloring: Descriptor) -> Self {
        PipelineConfig {
            s,
            n,
            mode,
            coloring,
            engineering: None,
            finder: FinderConfig::default(),
            strategy: Strategy::Auto,
            degree_check_budget: default_budget(),
            spot_check: SpotCheck::default(),
            max_steps: default_max_steps(),
            threads: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn oracle(&self) -> Result<ColoringOracle, ConfigError> {
        ColoringOracle::from_descriptor(&self.coloring).map_err(|e| ConfigError::Coloring(e.to_string()))
    }

    pub fn params(&self, n_vertices: u64) -> Result<RegimeParams, ConfigError> {
        Ok(match (self.mode, &self.engineering) {
            (Mode::PaperExact, None) => RegimeParams::paper_exact(self.s, self.n, n_vertices)?,
            (Mode::PaperExact, Some(_)) => {
                return Err(ConfigError::Parse("[engineering] constants are not allowed in paper-exact mode".into()))
            }
            (Mode::Engineering, None) => RegimeParams::engineering_default(self.s, self.n, n_vertices)?,
            (Mode::Engineering, Some(e)) => {
                RegimeParams::engineering(self.s, self.n, n_vertices, e.multipliers.clone(), e.codim_max.clone())?
            }
        })
    }

    /// Thread count from the config, else the environment, else rayon's default.
    pub fn thread_count(&self) -> usize {
        self.threads
            .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()))
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    VerifiedSuccess,
    HonestFailure,
    InvariantBreach,
    Refused,
    ConfigError,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::VerifiedSuccess => 0,
            Outcome::HonestFailure => 2,
            Outcome::InvariantBreach => 3,
            Outcome::Refused | Outcome::ConfigError => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: u8,
    pub sets: usize,
    pub exceptional: usize,
    pub vertices: u64,
    pub codim_histogram: BTreeMap<u8, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub levels: Vec<LevelStats>,
    pub strategies: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotResult {
    pub sample: usize,
    pub size: usize,
    /// "absent", "found" or "unconfirmed".
    pub result: String,
    pub clique: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub checks: usize,
    pub sampled: usize,
    pub all_pass: bool,
    pub failing: Vec<DegreeCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSummary {
    pub steps: usize,
    pub cubes_per_level: Vec<usize>,
    pub codim_histogram: BTreeMap<u8, usize>,
    pub bad_mass_exceeded: usize,
    pub failure: Option<FailureReport>,
    pub audit: Option<Vec<AuditItem>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneSummary {
    pub cubes: usize,
    pub removed: usize,
    pub min_kept_ratio: Option<String>,
    pub ledger: Vec<Removal>,
    pub certification: Certification,
    pub reprune_removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedSummary {
    pub cubes: Vec<CubeStats>,
    pub audit_violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariant {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub regime: Option<RegimeParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stamp: Option<String>,
    pub family: Option<FamilyStats>,
    pub degree_bounds: Option<DegreeSummary>,
    pub spot_check: Vec<SpotResult>,
    pub tiling: Option<TilingSummary>,
    pub pruning: Option<PruneSummary>,
    pub embedding: Option<EmbedSummary>,
    pub verification: Option<Verdict>,
    pub invariants: Vec<Invariant>,
    pub outcome: Outcome,
    pub message: Option<String>,
}

/// Report plus the artifacts of each stage and the stage timings.
pub struct PipelineResult {
    pub report: RunReport,
    pub timings: Vec<(String, f64)>,
    pub forest: Option<FamilyForest>,
    pub checkpoint: Option<Checkpoint>,
    pub events: Option<TilingRun>,
    pub pruned: Option<PrunedAssignment>,
    pub embedding: Option<Embedding>,
}

impl PipelineResult {
    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }
}

pub fn family_stats(forest: &FamilyForest) -> FamilyStats {
    let top = forest.sets.iter().map(|s| s.level).max().unwrap_or(0);
    let levels = (0..=top)
        .map(|l| {
            let sets: Vec<_> = forest.at_level(l).collect();
            let mut codim_histogram = BTreeMap::new();
            for s in &sets {
                *codim_histogram.entry(s.own_codim()).or_insert(0) += 1;
            }
            LevelStats {
                level: l,
                sets: sets.len(),
                exceptional: sets.iter().filter(|s| s.exceptional).count(),
                vertices: sets.iter().map(|s| s.len() as u64).sum(),
                codim_histogram,
            }
        })
        .collect();
    let mut strategies = BTreeMap::new();
    for e in &forest.log {
        let key = e
            .strategy
            .map(|s| serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
            .unwrap_or_else(|| "none".into());
        *strategies.entry(key).or_insert(0) += 1;
    }
    FamilyStats { levels, strategies }
}

/// Exact blue-K_s searches on seeded random subsets of [N]; report only.
pub fn spot_check(o: &ColoringOracle, s: u8, cfg: &SpotCheck) -> Vec<SpotResult> {
    let n = o.n() as usize;
    let size = cfg.size.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.samples)
        .map(|i| {
            let set = VertexSet::from_vec(sample(&mut rng, n, size).into_iter().map(|v| v as u32).collect());
            let (result, clique) = match find_blue_clique(o, &set, s as usize, SearchMode::default()) {
                Ok(CliqueSearch::Found(c)) => ("found", Some(c)),
                Ok(CliqueSearch::Absent) => ("absent", None),
                _ => ("unconfirmed", None),
            };
            SpotResult {
                sample: i,
                size,
                result: result.into(),
                clique,
            }
        })
        .collect()
}

struct Clock {
    start: Instant,
    timings: Vec<(String, f64)>,
}

impl Clock {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push((stage.into(), (now - self.start).as_secs_f64()));
        self.start = now;
    }
}

/// Runs every stage in a thread pool sized by the config.
pub fn run_pipeline(config: &PipelineConfig) -> PipelineResult {
    let threads = config.thread_count();
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| run_stages(config)),
        Err(_) => run_stages(config),
    }
}

fn run_stages(config: &PipelineConfig) -> PipelineResult {
    let mut clock = Clock {
        start: Instant::now(),
        timings: Vec::new(),
    };
    let mut report = RunReport {
        config: config.clone(),
        regime: None,
        stamp: None,
        family: None,
        degree_bounds: None,
        spot_check: vec![],
        tiling: None,
        pruning: None,
        embedding: None,
        verification: None,
        invariants: vec![],
        outcome: Outcome::ConfigError,
        message: None,
    };
    let mut result = PipelineResult {
        report: report.clone(),
        timings: vec![],
        forest: None,
        checkpoint: None,
        events: None,
        pruned: None,
        embedding: None,
    };
    let finish = |mut result: PipelineResult, report: RunReport, clock: Clock| {
        result.report = report;
        result.timings = clock.timings;
        result
    };
    macro_rules! stop {
        ($outcome:expr, $msg:expr) => {{
            report.outcome = $outcome;
            report.message = Some($msg.to_string());
            log::warn!("pipeline stopped: {}", $msg);
            return finish(result, report, clock);
        }};
    }

    let o = match config.oracle() {
        Ok(o) => o,
        Err(e) => stop!(Outcome::ConfigError, e),
    };
    let params = match config.params(o.n() as u64) {
        Ok(p) => p,
        Err(ConfigError::Regime(e @ RegimeError::Refused { .. })) => stop!(Outcome::Refused, e),
        Err(e) => stop!(Outcome::ConfigError, e),
    };
    report.stamp = params.stamp().map(String::from);
    report.regime = Some(params.clone());
    clock.lap("setup");

    let forest = match preprocess(&o, &params, &config.finder, config.strategy) {
        Ok(f) => f,
        Err(PreprocessError::TooLarge(n)) => stop!(Outcome::ConfigError, format!("N = {n} too large")),
        Err(e) => stop!(Outcome::InvariantBreach, e),
    };
    let valid = forest.validate(&params);
    report.invariants.push(Invariant {
        name: "forest-structure".into(),
        pass: valid.is_ok(),
    });
    report.family = Some(family_stats(&forest));
    if let Err(e) = valid {
        result.forest = Some(forest);
        stop!(Outcome::InvariantBreach, e);
    }
    clock.lap("preprocess");

    let degrees = check_degree_bounds(&o, &forest, &params, config.degree_check_budget);
    report.degree_bounds = Some(DegreeSummary {
        checks: degrees.checks.len(),
        sampled: degrees.checks.iter().filter(|c| c.sampled).count(),
        all_pass: degrees.all_pass,
        failing: degrees.checks.iter().filter(|c| !c.pass).cloned().collect(),
    });
    report.spot_check = spot_check(&o, params.s, &config.spot_check);
    clock.lap("diagnostics");

    let mut run = match TilingRun::new(&params) {
        Ok(r) => r,
        Err(e) => stop!(Outcome::InvariantBreach, e),
    };
    let outcome = run.run(&o, &forest, &params, config.max_steps);
    let mut summary = TilingSummary {
        steps: run.events.len(),
        cubes_per_level: (0..=run.tiling.top_level()).map(|l| run.tiling.level(l).len()).collect(),
        codim_histogram: BTreeMap::new(),
        bad_mass_exceeded: run.events.iter().flat_map(|e| &e.bad_mass).filter(|b| !b.within).count(),
        failure: None,
        audit: None,
    };
    for ins in run.tiling.log() {
        *summary.codim_histogram.entry(ins.codim).or_insert(0) += 1;
    }
    result.checkpoint = Some(run.checkpoint());
    match outcome {
        Ok(StepOutcome::Complete) => {}
        Ok(StepOutcome::Failure(f)) => {
            summary.failure = Some(f);
            report.tiling = Some(summary);
            result.forest = Some(forest);
            result.events = Some(run);
            stop!(Outcome::HonestFailure, "tiling found no admissible cube");
        }
        Ok(StepOutcome::Inserted { .. }) => unreachable!("run returns a terminal outcome"),
        Err(e @ TilingRunError::Invariant(_)) => {
            report.tiling = Some(summary);
            stop!(Outcome::InvariantBreach, e)
        }
        Err(e) => {
            report.tiling = Some(summary);
            stop!(Outcome::InvariantBreach, e)
        }
    }
    let audit_report = audit(&o, &run, &forest, &params);
    report.invariants.push(Invariant {
        name: "tiling-audit".into(),
        pass: audit_report.pass,
    });
    summary.audit = Some(audit_report.items.clone());
    report.tiling = Some(summary);
    if !audit_report.pass {
        stop!(Outcome::InvariantBreach, "tiling audit failed");
    }
    clock.lap("tile");

    let pruned = match prune(&o, &run, &forest, &params) {
        Ok(p) => p,
        Err(e @ PruneError::TooMuchRemoved { .. }) => {
            report.invariants.push(Invariant {
                name: "prune-half-mass".into(),
                pass: false,
            });
            stop!(Outcome::HonestFailure, e)
        }
        Err(e) => stop!(Outcome::InvariantBreach, e),
    };
    let reprune = match reprune_count(&o, &run, &forest, &params, &pruned) {
        Ok(r) => r,
        Err(e) => stop!(Outcome::InvariantBreach, e),
    };
    let min_ratio = pruned
        .cubes
        .iter()
        .min_by(|a, b| (a.kept.len() as u128 * b.original as u128).cmp(&(b.kept.len() as u128 * a.original as u128)))
        .map(|p| format!("{}/{}", p.kept.len(), p.original));
    report.pruning = Some(PruneSummary {
        cubes: pruned.cubes.len(),
        removed: pruned.total_removed(),
        min_kept_ratio: min_ratio,
        ledger: pruned.ledger.clone(),
        certification: pruned.certification.clone(),
        reprune_removed: reprune,
    });
    report.invariants.push(Invariant {
        name: "prune-half-mass".into(),
        pass: true,
    });
    report.invariants.push(Invariant {
        name: "max-degree-certified".into(),
        pass: pruned.certification.pass,
    });
    report.invariants.push(Invariant {
        name: "prune-idempotent".into(),
        pass: reprune == 0,
    });
    if !pruned.certification.pass {
        stop!(Outcome::HonestFailure, "max-degree condition not certified after pruning");
    }
    if reprune != 0 {
        stop!(Outcome::InvariantBreach, "re-pruning removed vertices");
    }
    clock.lap("prune");

    let embedded = greedy_embed(&o, &pruned, &run, &params);
    result.forest = Some(forest);
    result.pruned = Some(pruned);
    let er = match embedded {
        Ok(er) => er,
        Err(e @ EmbedError::NoImage { .. }) => stop!(Outcome::HonestFailure, e),
        Err(e) => stop!(Outcome::InvariantBreach, e),
    };
    report.embedding = Some(EmbedSummary {
        cubes: er.cubes.clone(),
        audit_violations: er.audit_violations.clone(),
    });
    clock.lap("embed");

    let verdict = verify_red_cube(&o, &er.embedding);
    let ok = verdict.is_valid();
    report.verification = Some(verdict);
    report.invariants.push(Invariant {
        name: "red-cube-verified".into(),
        pass: ok,
    });
    result.embedding = Some(er.embedding);
    result.events = Some(run);
    clock.lap("verify");
    if !ok {
        stop!(Outcome::InvariantBreach, "embedding failed verification");
    }
    report.outcome = Outcome::VerifiedSuccess;
    if params.mode == Mode::Engineering && report.stamp.is_none() {
        report.stamp = params.stamp().map(String::from);
    }
    finish(result, report, clock)
}

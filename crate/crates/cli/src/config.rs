//! Run configuration: one TOML file, with a few command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use helpdp_core::io::Header;
use helpdp_core::planner::{MissingRows, RewardConfig, SearchConfig, ThresholdVariant};
use helpdp_sim::actors::parse_interventions;
use helpdp_sim::env::SplitSizes;
use helpdp_sim::pipeline::HelperMode;
use helpdp_sim::{EnvConfig, Intervention};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exit::UsageError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// `strong`, `mcts` or `both`.
    #[serde(default = "default_interventions")]
    pub interventions: String,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub splits: SplitSizes,
    #[serde(default)]
    pub collect: CollectConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub annotate: AnnotateConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub selfreg: SelfRegConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub model: ModelConfig,
}

fn default_interventions() -> String {
    "strong".into()
}

/// Where files live. Unset entries default to fixed names inside `out`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out: Option<PathBuf>,
    pub tasks: Option<PathBuf>,
    pub rollouts: Option<PathBuf>,
    pub transitions: Option<PathBuf>,
    pub success: Option<PathBuf>,
    pub solution: Option<PathBuf>,
    pub helper: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectConfig {
    /// Repetition labels; one episode per task, schedule entry and label.
    pub seeds: Vec<u64>,
    /// Per-intervention trigger probabilities; the built-in sweep if unset.
    pub schedule: Option<Vec<Vec<f64>>>,
}

impl Default for CollectConfig {
    fn default() -> Self {
        CollectConfig {
            seeds: vec![0, 1, 2],
            schedule: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSource {
    /// Counts and success rates from the rollout log.
    #[default]
    Empirical,
    /// Ground-truth models enumerated from the training tasks.
    Exact,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub source: FitSource,
    /// Additive smoothing applied when counts are normalized.
    pub alpha: f64,
    /// Largest number of states an exact fit may enumerate.
    pub state_cap: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            source: FitSource::Empirical,
            alpha: 0.0,
            state_cap: helpdp_sim::exact::DEFAULT_STATE_CAP,
        }
    }
}

/// A scalar or one value per intervention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Costs {
    One(f64),
    Many(Vec<f64>),
}

impl Costs {
    pub fn expand(&self, k: usize) -> Result<Vec<f64>> {
        match self {
            Costs::One(r) => Ok(vec![*r; k]),
            Costs::Many(v) if v.len() == k => Ok(v.clone()),
            Costs::Many(v) => Err(UsageError(format!("{} costs given for {k} interventions", v.len())).into()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub r: Option<Costs>,
    pub budget: Option<f64>,
    pub gamma: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub variant: ThresholdVariant,
    pub missing_rows: MissingRows,
    pub search: SearchBounds,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        let base = RewardConfig::single(0.0);
        PlannerConfig {
            r: None,
            budget: None,
            gamma: base.gamma,
            epsilon: base.epsilon,
            max_iters: base.max_iters,
            variant: base.variant,
            missing_rows: base.missing_rows,
            search: SearchBounds::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchBounds {
    pub lo: f64,
    pub hi: f64,
    pub usage_tol: f64,
    pub r_tol: f64,
    pub max_steps: usize,
    pub weights: Option<Vec<f64>>,
}

impl Default for SearchBounds {
    fn default() -> Self {
        let s = SearchConfig::new(0.0);
        SearchBounds {
            lo: s.lo,
            hi: s.hi,
            usage_tol: s.usage_tol,
            r_tol: s.r_tol,
            max_steps: s.max_steps,
            weights: s.weights,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateConfig {
    pub mode: HelperMode,
    /// If set, off-table states help when `p(s, nohelp)` is below this.
    pub fallback_threshold: Option<f64>,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        AnnotateConfig {
            mode: HelperMode::AllStates,
            fallback_threshold: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub split: String,
    pub n_seeds: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            split: "test".into(),
            n_seeds: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    #[default]
    Random,
    Statewise,
    TaskwiseAllSteps,
    TaskwiseFirstFive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    /// Random baseline: per-step trigger probability per intervention.
    pub p: Costs,
    /// Thresholding baselines: share of validation states or tasks above the threshold.
    pub percent: f64,
    pub intervention: usize,
    /// Base-actor runs per validation task used for calibration.
    pub calibration_seeds: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            kind: BaselineKind::Random,
            p: Costs::One(0.1),
            percent: 10.0,
            intervention: 1,
            calibration_seeds: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfRegConfig {
    /// Base-actor runs per task on each of the validation and test splits.
    pub n_seeds: usize,
}

impl Default for SelfRegConfig {
    fn default() -> Self {
        SelfRegConfig { n_seeds: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Most decision states brute force will enumerate.
    pub cap: usize,
}

/// Model used by `solve`, `search` and `oracle`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Built-in hand-checkable model (`mdp_a`, `mdp_a_dominated`, `mdp_b`,
    /// `corridor`) used instead of the fitted files. Its start is `s0`.
    pub fixture: Option<String>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            cap: helpdp_core::oracle::DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<f64>,
    pub r: Option<Vec<f64>>,
    pub variant: Option<ThresholdVariant>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?;
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(b) = overrides.budget {
            cfg.planner.budget = Some(b);
            cfg.planner.r = None;
        }
        if let Some(r) = &overrides.r {
            cfg.planner.r = Some(if r.len() == 1 { Costs::One(r[0]) } else { Costs::Many(r.clone()) });
            cfg.planner.budget = None;
        }
        if let Some(v) = overrides.variant {
            cfg.planner.variant = v;
        }
        if let Some(out) = &overrides.out {
            cfg.paths.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.env.validate().map_err(|e| UsageError(e.to_string()))?;
        let k = self.interventions()?.len();
        if let Some(r) = &self.planner.r {
            let r = r.expand(k)?;
            if r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                bail!(UsageError(format!("costs must be finite and >= 0, got {r:?}")));
            }
        }
        if let Some(b) = self.planner.budget {
            if !(b.is_finite() && b >= 0.0) {
                bail!(UsageError(format!("budget must be finite and >= 0, got {b}")));
            }
        }
        if let Some(t) = self.annotate.fallback_threshold {
            if !(0.0..=1.0).contains(&t) {
                bail!(UsageError(format!("annotate.fallback_threshold must be in [0, 1], got {t}")));
            }
        }
        if self.collect.seeds.is_empty() {
            bail!(UsageError("collect.seeds must not be empty".into()));
        }
        if self.eval.n_seeds == 0 || self.selfreg.n_seeds == 0 || self.baseline.calibration_seeds == 0 {
            bail!(UsageError("seed counts must be positive".into()));
        }
        if self.baseline.intervention == 0 || self.baseline.intervention > k {
            bail!(UsageError(format!("baseline.intervention must be in 1..={k}")));
        }
        if let Some(f) = &self.model.fixture {
            if helpdp_core::fixtures::by_name(f).is_none() {
                bail!(UsageError(format!("unknown fixture `{f}` ({})", helpdp_core::fixtures::NAMES.join(", "))));
            }
        }
        if !["train", "val", "test"].contains(&self.eval.split.as_str()) {
            bail!(UsageError(format!("eval.split must be train, val or test, got `{}`", self.eval.split)));
        }
        Ok(())
    }

    pub fn interventions(&self) -> Result<Vec<Intervention>> {
        Ok(parse_interventions(&self.interventions).map_err(UsageError)?)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn file(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir().join(name))
    }

    pub fn tasks_path(&self) -> PathBuf {
        self.file(&self.paths.tasks, "tasks.jsonl")
    }

    pub fn rollouts_path(&self) -> PathBuf {
        self.file(&self.paths.rollouts, "rollouts.jsonl")
    }

    pub fn transitions_path(&self) -> PathBuf {
        self.file(&self.paths.transitions, "transitions.jsonl")
    }

    pub fn success_path(&self) -> PathBuf {
        self.file(&self.paths.success, "success.jsonl")
    }

    pub fn solution_path(&self) -> PathBuf {
        self.file(&self.paths.solution, "solution.json")
    }

    pub fn helper_path(&self) -> PathBuf {
        self.file(&self.paths.helper, "helper.json")
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.out_dir().join(name)
    }

    /// Reward settings with `r` as the costs.
    pub fn reward(&self, r: Vec<f64>) -> RewardConfig {
        RewardConfig::multi(r)
            .with_gamma(self.planner.gamma)
            .with_epsilon(self.planner.epsilon)
            .with_max_iters(self.planner.max_iters)
            .with_variant(self.planner.variant)
            .with_missing_rows(self.planner.missing_rows)
    }

    pub fn costs(&self, k: usize) -> Result<Vec<f64>> {
        match &self.planner.r {
            Some(r) => r.expand(k),
            None => bail!(UsageError("no cost given: set planner.r or pass --r".into())),
        }
    }

    pub fn search(&self) -> Result<SearchConfig> {
        let Some(budget) = self.planner.budget else {
            bail!(UsageError("no budget given: set planner.budget or pass --budget".into()));
        };
        let b = &self.planner.search;
        let mut s = SearchConfig::new(budget).with_bounds(b.lo, b.hi);
        s.usage_tol = b.usage_tol;
        s.r_tol = b.r_tol;
        s.max_steps = b.max_steps;
        s.weights = b.weights.clone();
        Ok(s)
    }

    /// Hash of everything that affects results. File locations are left
    /// out, so the same experiment written elsewhere hashes the same.
    pub fn hash(&self) -> String {
        let mut semantic = self.clone();
        semantic.paths = Paths::default();
        let text = serde_json::to_string(&semantic).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn header(&self) -> Header {
        Header {
            config_hash: self.hash(),
            seed: self.seed,
        }
    }
}

/// Fails with a usage error if a required input is missing.
pub fn require(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        bail!(UsageError(format!("{what} not found at {} (run the producing command first)", path.display())));
    }
    Ok(())
}

/// Creates `dir` and its parents.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

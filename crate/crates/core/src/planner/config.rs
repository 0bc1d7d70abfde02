use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::key::ActionKind;

/// Rule used to pick help over nohelp at each state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVariant {
    /// `help iff r < dp / dM` with `dp = p_help - p_nohelp` and
    /// `dM = p_help * M_help - p_nohelp * M_nohelp`, taken from the success model.
    PaperLiteral,
    /// `help iff dS > r * dM` with `dS`, `dM` the differences of the
    /// recursively computed success and usage branches. Equivalent to
    /// comparing branch values, so it agrees with value iteration.
    #[default]
    ValueConsistent,
}

impl ThresholdVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdVariant::PaperLiteral => "paper_literal",
            ThresholdVariant::ValueConsistent => "value_consistent",
        }
    }
}

impl std::str::FromStr for ThresholdVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_literal" => Ok(ThresholdVariant::PaperLiteral),
            "value_consistent" => Ok(ThresholdVariant::ValueConsistent),
            _ => Err(Error::Parse(format!("unknown threshold variant `{s}`"))),
        }
    }
}

/// What to do with non-terminal states that lack some action rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingRows {
    /// Fail, naming the first incomplete state.
    #[default]
    Reject,
    /// Restrict each state to its observed actions. States with no rows at
    /// all become leaves valued by the success model's `p(s, nohelp)` with no
    /// further usage.
    Restrict,
}

/// Reward regime and iteration controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Per-help cost, one entry per intervention.
    pub r: Vec<f64>,
    pub gamma: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    #[serde(default)]
    pub variant: ThresholdVariant,
    #[serde(default)]
    pub missing_rows: MissingRows,
}

pub const DEFAULT_GAMMA: f64 = 0.99;
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

impl RewardConfig {
    pub fn single(r: f64) -> Self {
        Self::multi(vec![r])
    }

    pub fn multi(r: Vec<f64>) -> Self {
        RewardConfig {
            r,
            gamma: DEFAULT_GAMMA,
            epsilon: DEFAULT_EPSILON,
            max_iters: DEFAULT_MAX_ITERS,
            variant: ThresholdVariant::default(),
            missing_rows: MissingRows::default(),
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_variant(mut self, variant: ThresholdVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_missing_rows(mut self, missing_rows: MissingRows) -> Self {
        self.missing_rows = missing_rows;
        self
    }

    pub fn with_r(mut self, r: Vec<f64>) -> Self {
        self.r = r;
        self
    }

    /// Number of interventions.
    pub fn interventions(&self) -> usize {
        self.r.len()
    }

    /// Immediate cost of taking `action`.
    pub fn cost(&self, action: ActionKind) -> f64 {
        action.intervention().map_or(0.0, |i| self.r[i - 1])
    }

    pub fn validate(&self) -> Result<()> {
        if self.r.is_empty() {
            return Err(Error::InvalidConfig("at least one intervention cost is required".into()));
        }
        if let Some(r) = self.r.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidConfig(format!("costs must be finite and >= 0, got {r}")));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

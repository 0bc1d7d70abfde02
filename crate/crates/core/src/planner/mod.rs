//! Offline dynamic programming over a tabular model: usage/policy iteration
//! (single and multiple interventions), a value-iteration reference and the
//! reward search that meets a usage budget.

mod config;
mod multi;
mod prepare;
mod rules;
mod search;
mod single;
mod solution;
mod value_iteration;

pub use config::{
    MissingRows, RewardConfig, ThresholdVariant, DEFAULT_EPSILON, DEFAULT_GAMMA, DEFAULT_MAX_ITERS,
};
pub use multi::multi_usage_policy_iteration;
pub use rules::{literal_prefers_help, prefers_help, NEAR_ZERO_USAGE_GAP, TIE_TOL};
pub use search::{reward_search, Probe, SearchConfig, SearchResult};
pub use single::{usage_policy_iteration, usage_policy_iteration_traced, Sweep};
pub use solution::Solution;
pub use value_iteration::{q_values, value_iteration, ValueIterationResult};

use std::collections::BTreeMap;

use crate::error::Result;
use crate::key::ActionKind;
use crate::model::TransitionModel;
use crate::success::SuccessModel;

/// Runs the single-intervention solver when one cost is configured and the
/// multi-intervention solver otherwise.
pub fn solve(model: &TransitionModel, success: &SuccessModel, cfg: &RewardConfig) -> Result<Solution> {
    if cfg.interventions() == 1 {
        usage_policy_iteration(model, success, cfg)
    } else {
        multi_usage_policy_iteration(model, success, cfg)
    }
}

/// Flat per-state tables produced by the solvers.
pub(crate) struct Tables {
    pub k: usize,
    /// `usage[i * k + j]`
    pub usage: Vec<f64>,
    pub success: Vec<f64>,
    pub value: Vec<f64>,
    pub policy: Vec<Option<ActionKind>>,
}

pub(crate) fn assemble(
    model: &TransitionModel,
    cfg: &RewardConfig,
    tables: Tables,
    iterations_run: usize,
    converged: bool,
) -> Solution {
    let k = tables.k;
    let mut policy = BTreeMap::new();
    let mut usage = BTreeMap::new();
    let mut success = BTreeMap::new();
    let mut value = BTreeMap::new();
    for (i, key) in model.states().iter().enumerate() {
        if let Some(a) = tables.policy[i] {
            policy.insert(key.clone(), a);
        }
        usage.insert(key.clone(), tables.usage[i * k..(i + 1) * k].to_vec());
        success.insert(key.clone(), tables.success[i]);
        value.insert(key.clone(), tables.value[i]);
    }
    Solution {
        r: cfg.r.clone(),
        gamma: cfg.gamma,
        variant: cfg.variant,
        converged,
        iterations_run,
        expected_usage: Vec::new(),
        policy,
        usage,
        success,
        value,
    }
}

use std::collections::BTreeMap;

use helpdp_core::{ActionKind, StateKey, SuccessModel, TransitionModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::Task;
use crate::error::{Result, SimError};
use crate::episode::{Env, Fixed, TaskRunner};
use crate::pipeline::evaluate::eval_seed;

/// `1 - p(s, nohelp)`, if the success model knows `s`.
pub fn difficulty(success: &SuccessModel, key: &StateKey) -> Option<f64> {
    success.get(key, ActionKind::NoHelp).map(|p| 1.0 - p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskwiseVariant {
    /// Judge the whole base run; if triggered, restart with the intervention.
    AllSteps,
    /// Judge the first steps; if triggered, hand over for the rest.
    FirstFive,
}

impl TaskwiseVariant {
    /// Last step index whose state feeds the first-steps decision.
    pub const FIRST_STEPS: usize = 5;
}

/// Calibrated trigger level: scores strictly above `value` trigger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub percent: f64,
    /// Number of validation scores it was calibrated on.
    pub population: usize,
}

/// Level such that the top `percent` of `scores` lie strictly above it.
///
/// With `k = ceil(percent * n / 100)`: `k = 0` gives `+inf` (never), `k >= n`
/// gives `-inf` (always), otherwise the `(k+1)`-th largest score. Ties with
/// that score do not trigger.
pub fn percentile_threshold(scores: &[f64], percent: f64) -> Result<Threshold> {
    if scores.is_empty() {
        return Err(SimError::EmptyValidation);
    }
    if !(0.0..=100.0).contains(&percent) {
        return Err(SimError::Config(format!("percent must be in [0, 100], got {percent}")));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    let k = (percent * n as f64 / 100.0 - 1e-9).ceil().max(0.0) as usize;
    let value = if k == 0 {
        f64::INFINITY
    } else if k >= n {
        f64::NEG_INFINITY
    } else {
        sorted[k]
    };
    Ok(Threshold {
        value,
        percent,
        population: n,
    })
}

/// Difficulties of every state the base actor visits on `tasks`.
pub fn visited_difficulties(env: &Env, tasks: &[Task], success: &SuccessModel, n_seeds: usize, seed: u64) -> Result<Vec<f64>> {
    let results = base_runs(env, tasks, n_seeds, seed)?;
    Ok(results
        .iter()
        .flat_map(|states| states.iter().filter_map(|s| difficulty(success, s)))
        .collect())
}

/// One score per base-actor episode: the largest difficulty among the states
/// the variant looks at.
pub fn task_scores(
    env: &Env,
    tasks: &[Task],
    success: &SuccessModel,
    variant: TaskwiseVariant,
    n_seeds: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let limit = match variant {
        TaskwiseVariant::AllSteps => usize::MAX,
        TaskwiseVariant::FirstFive => TaskwiseVariant::FIRST_STEPS + 1,
    };
    Ok(base_runs(env, tasks, n_seeds, seed)?
        .iter()
        .map(|states| {
            states
                .iter()
                .take(limit)
                .filter_map(|s| difficulty(success, s))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

/// Threshold for the state-wise (`None`) or a task-wise baseline from base
/// runs on validation tasks.
pub fn calibrate_threshold(
    env: &Env,
    val: &[Task],
    success: &SuccessModel,
    variant: Option<TaskwiseVariant>,
    percent: f64,
    n_seeds: usize,
    seed: u64,
) -> Result<Threshold> {
    if val.is_empty() {
        return Err(SimError::EmptyValidation);
    }
    let scores = match variant {
        None => visited_difficulties(env, val, success, n_seeds, seed)?,
        Some(v) => task_scores(env, val, success, v, n_seeds, seed)?,
    };
    percentile_threshold(&scores, percent)
}

/// Visited non-terminal state keys of base-actor episodes, seeded as in
/// [`evaluate`] so the runs match an evaluation of the base actor.
pub(crate) fn base_runs(env: &Env, tasks: &[Task], n_seeds: usize, seed: u64) -> Result<Vec<Vec<StateKey>>> {
    if tasks.is_empty() {
        return Err(SimError::EmptyValidation);
    }
    let per_task: Vec<Result<Vec<Vec<StateKey>>>> = tasks
        .par_iter()
        .enumerate()
        .map(|(ti, task)| {
            let mut runner = TaskRunner::new(env, task);
            (0..n_seeds)
                .map(|rep| {
                    let ep = runner.run(&mut Fixed(None), eval_seed(seed, ti, rep))?;
                    Ok(ep.steps.into_iter().map(|st| st.state).collect())
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_task {
        out.extend(r?);
    }
    Ok(out)
}

/// State-wise thresholding on a tabular model: help (intervention 1) at
/// every state with rows whose difficulty exceeds `threshold`.
pub fn statewise_policy(model: &TransitionModel, success: &SuccessModel, threshold: f64) -> BTreeMap<StateKey, ActionKind> {
    model
        .states()
        .iter()
        .enumerate()
        .filter(|(i, s)| !s.is_terminal() && !model.rows(*i).is_empty())
        .map(|(_, s)| {
            let help = difficulty(success, s).is_some_and(|d| d > threshold);
            (s.clone(), if help { ActionKind::help(1) } else { ActionKind::NoHelp })
        })
        .collect()
}

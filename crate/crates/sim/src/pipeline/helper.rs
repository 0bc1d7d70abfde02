use std::collections::{BTreeMap, BTreeSet};

use helpdp_core::planner::Solution;
use helpdp_core::{ActionKind, Error as CoreError, RolloutLog, StateKey, SuccessModel, TransitionModel};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HelperMode {
    AllStates,
    TrajectoryOnly,
}

impl std::str::FromStr for HelperMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all_states" => Ok(HelperMode::AllStates),
            "trajectory_only" => Ok(HelperMode::TrajectoryOnly),
            other => Err(format!("unknown helper mode `{other}` (all_states | trajectory_only)")),
        }
    }
}

/// Deployable lookup table with a fallback for states it has never seen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelperPolicy {
    pub table: BTreeMap<StateKey, ActionKind>,
    pub training_mode: HelperMode,
    pub fallback: ActionKind,
    /// Tasks left out because the policy walked off the data.
    #[serde(default)]
    pub dropped_tasks: Vec<String>,
    /// Replaces `fallback` for off-table states the success model knows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_fallback: Option<ThresholdFallback>,
}

/// Off-table rule: help with `intervention` when `p(s, nohelp)` is below
/// `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFallback {
    pub threshold: f64,
    pub intervention: usize,
    /// `p(s, nohelp)` for every known state outside the table.
    pub success: BTreeMap<StateKey, f64>,
}

impl HelperPolicy {
    pub fn action(&self, key: &StateKey) -> ActionKind {
        if let Some(a) = self.table.get(key) {
            return *a;
        }
        match &self.threshold_fallback {
            Some(rule) => match rule.success.get(key) {
                Some(p) if *p < rule.threshold => ActionKind::help(rule.intervention),
                Some(_) => ActionKind::NoHelp,
                None => self.fallback,
            },
            None => self.fallback,
        }
    }

    /// Switches off-table states to the success-thresholded rule.
    pub fn with_threshold_fallback(mut self, success: &SuccessModel, threshold: f64, intervention: usize) -> Self {
        let known = success
            .iter()
            .filter(|(s, a, _)| *a == ActionKind::NoHelp && !self.table.contains_key(*s))
            .map(|(s, _, e)| (s.clone(), e.p))
            .collect();
        self.threshold_fallback = Some(ThresholdFallback {
            threshold,
            intervention,
            success: known,
        });
        self
    }

    pub fn covers(&self, key: &StateKey) -> bool {
        self.table.contains_key(key)
    }
}

/// States reached by following the solution's policy through the model.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    /// Non-terminal states visited, in key order.
    pub states: BTreeSet<StateKey>,
    /// False if some visited non-terminal state had no row for its action.
    pub in_support: bool,
}

/// Expands the policy's trajectory tree from `start`.
pub fn expand_policy(sol: &Solution, model: &TransitionModel, start: &StateKey) -> Expansion {
    let mut states = BTreeSet::new();
    let mut in_support = true;
    let mut stack = vec![start.clone()];
    while let Some(s) = stack.pop() {
        if s.is_terminal() || states.contains(&s) {
            continue;
        }
        states.insert(s.clone());
        let row = model
            .index_of(&s)
            .zip(sol.action(&s))
            .and_then(|(i, a)| model.row(i, a));
        match row {
            Some(row) => stack.extend(row.next.iter().map(|&(j, _)| model.key(j).clone())),
            None => in_support = false,
        }
    }
    Expansion { states, in_support }
}

/// Lookup table distilled from a solution.
///
/// `AllStates` covers every non-terminal state recorded in `log`.
/// `TrajectoryOnly` covers the policy's trajectory tree from each task's
/// start, leaving out whole tasks whose tree leaves the model's support.
pub fn build_helper(sol: &Solution, log: &RolloutLog, model: &TransitionModel, mode: HelperMode) -> Result<HelperPolicy> {
    if !sol.converged {
        return Err(CoreError::NotConverged.into());
    }
    let mut table = BTreeMap::new();
    let mut dropped = Vec::new();
    match mode {
        HelperMode::AllStates => {
            for ep in &log.episodes {
                for step in &ep.steps {
                    if let Some(a) = sol.action(&step.state) {
                        table.insert(step.state.clone(), a);
                    }
                }
            }
        }
        HelperMode::TrajectoryOnly => {
            let mut starts: BTreeMap<&str, &StateKey> = BTreeMap::new();
            for ep in &log.episodes {
                starts.entry(ep.task_id.as_str()).or_insert(ep.start());
            }
            for (task, start) in starts {
                let exp = expand_policy(sol, model, start);
                if exp.in_support {
                    for s in exp.states {
                        let a = sol.action(&s).expect("supported states have a policy");
                        table.insert(s, a);
                    }
                } else {
                    dropped.push(task.to_owned());
                }
            }
        }
    }
    Ok(HelperPolicy {
        table,
        training_mode: mode,
        fallback: ActionKind::NoHelp,
        dropped_tasks: dropped,
        threshold_fallback: None,
    })
}

/// Partitions task ids by whether the policy's trajectory tree from their
/// start stays inside the model. Tasks whose start is unknown are unseen.
pub fn split_seen_unseen<'a>(
    starts: impl IntoIterator<Item = (&'a str, &'a StateKey)>,
    sol: &Solution,
    model: &TransitionModel,
) -> (Vec<String>, Vec<String>) {
    let mut seen = Vec::new();
    let mut unseen = Vec::new();
    for (id, start) in starts {
        if expand_policy(sol, model, start).in_support {
            seen.push(id.to_owned());
        } else {
            unseen.push(id.to_owned());
        }
    }
    (seen, unseen)
}

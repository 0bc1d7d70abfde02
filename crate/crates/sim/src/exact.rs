//! Ground-truth transition and success models of the synthetic chain.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use helpdp_core::oracle::continuation_success;
use helpdp_core::{ActionKind, StateKey, SuccessModel, TransitionModel};

use crate::actors::{base_distribution, strong_distribution, Intervention};
use crate::env::{Action, EnvState, Task};
use crate::episode::Env;
use crate::error::Result;
use crate::mcts::{mcts_distribution, BaseValues};

pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Exact models plus the start state of every task.
#[derive(Clone, Debug)]
pub struct ExactModels {
    pub transitions: TransitionModel,
    pub success: SuccessModel,
    pub starts: BTreeMap<String, StateKey>,
}

/// Action law of `who` at `state`; search uses fresh counts.
pub fn action_law(env: &Env, task: &Task, state: &EnvState, who: ActionKind, values: &mut BaseValues) -> Result<Vec<(Action, f64)>> {
    Ok(match who.intervention().map(|i| env.interventions[i - 1]) {
        None => base_distribution(&env.cfg, task, state, 0.0),
        Some(Intervention::Strong) => strong_distribution(&env.cfg, task, state),
        Some(Intervention::Mcts) => mcts_distribution(&env.cfg, task, state, values)?,
    })
}

/// Enumerates every state reachable from the tasks' starts under any action
/// source and builds nohelp rows from the base actor and `help_i` rows from
/// intervention `i`. `p(s, a)` continues with the base actor after `a`.
///
/// Tasks with identical dynamics share their states. Fails with
/// "enumeration too large" once more than `cap` states are found.
pub fn exact_models(env: &Env, tasks: &[Task], cap: usize) -> Result<ExactModels> {
    let mut rows: Vec<(StateKey, ActionKind, Vec<(StateKey, f64)>)> = Vec::new();
    let mut done_contexts = HashSet::new();
    let mut seen_total = 0usize;
    let mut starts = BTreeMap::new();
    let mut terminals = BTreeSet::new();
    for task in tasks {
        starts.insert(task.task_id.clone(), task.key(&task.start()));
        if !done_contexts.insert(task.context()) {
            continue;
        }
        let mut values = BaseValues::new(&env.cfg, task);
        let mut seen: HashSet<EnvState> = HashSet::new();
        let mut stack = vec![task.start()];
        seen.insert(task.start());
        while let Some(s) = stack.pop() {
            seen_total += 1;
            if seen_total > cap {
                return Err(helpdp_core::Error::EnumerationTooLarge { count: seen_total, cap }.into());
            }
            let key = task.key(&s);
            if s.is_terminal() {
                terminals.insert(key);
                continue;
            }
            for who in ActionKind::all(env.k()) {
                let mut dist: BTreeMap<StateKey, f64> = BTreeMap::new();
                for (a, p) in action_law(env, task, &s, who, &mut values)? {
                    let next = task.step(&s, a)?;
                    *dist.entry(task.key(&next)).or_default() += p;
                    if seen.insert(next) {
                        stack.push(next);
                    }
                }
                rows.push((key.clone(), who, normalized(dist)));
            }
        }
    }
    let transitions = TransitionModel::from_rows_with_states(rows, terminals)?;
    let success = continuation_success(&transitions)?;
    Ok(ExactModels {
        transitions,
        success,
        starts,
    })
}

/// Rescales accumulated probabilities so round-off never trips the row-sum check.
fn normalized(dist: BTreeMap<StateKey, f64>) -> Vec<(StateKey, f64)> {
    let total: f64 = dist.values().sum();
    dist.into_iter().map(|(k, p)| (k, p / total)).collect()
}

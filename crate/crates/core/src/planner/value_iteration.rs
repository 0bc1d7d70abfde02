use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::Result;
use crate::key::{ActionKind, StateKey};
use crate::model::{Row, TransitionModel};
use crate::planner::config::RewardConfig;
use crate::planner::prepare::{Node, Prepared};
use crate::planner::rules::TIE_TOL;
use crate::success::SuccessModel;

/// Optimal values of the reward regime computed directly by Bellman backups.
#[derive(Clone, Debug)]
pub struct ValueIterationResult {
    pub values: BTreeMap<StateKey, f64>,
    pub policy: BTreeMap<StateKey, ActionKind>,
    pub iterations: usize,
    pub converged: bool,
}

/// `V(s) = max_a [-cost(a) + gamma * sum P_a(s'|s) V(s')]`, terminal states
/// fixed at their outcome reward. Ties go to the lowest action.
///
/// `success` only matters for row-less states under
/// [`MissingRows::Restrict`](crate::planner::MissingRows::Restrict).
pub fn value_iteration(
    model: &TransitionModel,
    success: Option<&SuccessModel>,
    cfg: &RewardConfig,
) -> Result<ValueIterationResult> {
    let prep = Prepared::new(model, success, cfg)?;
    let n = model.len();
    let mut values: Vec<f64> = (0..n).map(|i| prep.base_success(i)).collect();
    let mut choice: Vec<Option<ActionKind>> = vec![None; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let next: Vec<Option<(f64, ActionKind)>> = (0..n)
            .into_par_iter()
            .map(|i| match &prep.nodes[i] {
                Node::Decision(actions) => Some(best_action(model.rows(i), actions, &values, cfg)),
                Node::Leaf(_) => Some((values[i], ActionKind::NoHelp)),
                Node::Terminal(_) => None,
            })
            .collect();
        let mut delta: f64 = 0.0;
        for (i, u) in next.into_iter().enumerate() {
            if let Some((v, a)) = u {
                delta = delta.max((v - values[i]).abs());
                values[i] = v;
                choice[i] = Some(a);
            }
        }
        if delta < cfg.epsilon {
            converged = true;
            break;
        }
    }
    let mut out_values = BTreeMap::new();
    let mut policy = BTreeMap::new();
    for (i, key) in model.states().iter().enumerate() {
        out_values.insert(key.clone(), values[i]);
        if let Some(a) = choice[i] {
            policy.insert(key.clone(), a);
        }
    }
    Ok(ValueIterationResult {
        values: out_values,
        policy,
        iterations,
        converged,
    })
}

fn best_action(rows: &[Row], actions: &[usize], values: &[f64], cfg: &RewardConfig) -> (f64, ActionKind) {
    let mut best = (f64::NEG_INFINITY, ActionKind::NoHelp);
    for &a in actions {
        let row = &rows[a];
        let q = -cfg.cost(row.action) + cfg.gamma * row.expect(values);
        if q > best.0 + TIE_TOL {
            best = (q, row.action);
        }
    }
    best
}

/// One-step lookahead `Q(s, a)` for every row of the model given state values.
/// States missing from `values` count as 0.
pub fn q_values(
    model: &TransitionModel,
    cfg: &RewardConfig,
    values: &BTreeMap<StateKey, f64>,
) -> BTreeMap<(StateKey, ActionKind), f64> {
    let dense: Vec<f64> = model
        .states()
        .iter()
        .map(|s| values.get(s).copied().unwrap_or(0.0))
        .collect();
    let mut out = BTreeMap::new();
    for (i, key) in model.states().iter().enumerate() {
        for row in model.rows(i) {
            let q = -cfg.cost(row.action) + cfg.gamma * row.expect(&dense);
            out.insert((key.clone(), row.action), q);
        }
    }
    out
}

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::key::{ActionKind, StateKey};
use crate::model::TransitionModel;
use crate::planner::RewardConfig;
use crate::success::SuccessModel;

/// Exact `S`, `M` and `V` tables of one fixed policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub success: BTreeMap<StateKey, f64>,
    pub usage: BTreeMap<StateKey, Vec<f64>>,
    pub value: BTreeMap<StateKey, f64>,
}

impl PolicyEvaluation {
    pub fn total_usage(&self, s: &StateKey) -> f64 {
        self.usage.get(s).map_or(0.0, |m| m.iter().sum())
    }
}

/// Smallest pivot accepted before the system is declared singular.
const PIVOT_TOL: f64 = 1e-12;

/// Solves `(I - gamma P_pi) x = b` for the success, per-intervention usage
/// and value vectors of `policy` by LU with partial pivoting.
///
/// States without rows are leaves worth `leaves(s, nohelp)` (0 if absent or
/// no model is given) with no further usage. `V` is solved from its own
/// right-hand side, so `V = S - sum r_i M^i` holds only up to round-off.
pub fn exact_policy_eval(
    model: &TransitionModel,
    policy: &BTreeMap<StateKey, ActionKind>,
    cfg: &RewardConfig,
    leaves: Option<&SuccessModel>,
) -> Result<PolicyEvaluation> {
    let k = cfg.interventions();
    let gamma = cfg.gamma;
    let n = model.len();

    // fixed values outside the linear system
    let mut fixed = vec![0.0; n];
    let mut slot = vec![usize::MAX; n];
    let mut decision = Vec::new();
    for (i, key) in model.states().iter().enumerate() {
        if let Some(o) = key.terminal() {
            fixed[i] = o.reward();
        } else if model.rows(i).is_empty() {
            fixed[i] = leaves.and_then(|m| m.get(key, ActionKind::NoHelp)).unwrap_or(0.0);
        } else {
            slot[i] = decision.len();
            decision.push(i);
        }
    }

    let d = decision.len();
    let cols = 2 + k;
    let mut a = DMatrix::<f64>::identity(d, d);
    let mut b = DMatrix::<f64>::zeros(d, cols);
    for (row_idx, &i) in decision.iter().enumerate() {
        let key = model.key(i);
        let action = *policy.get(key).ok_or_else(|| Error::PolicyUndefined(key.clone()))?;
        let row = model.row(i, action).ok_or_else(|| Error::MissingRow {
            state: key.clone(),
            action,
        })?;
        for &(j, p) in &row.next {
            if slot[j] != usize::MAX {
                a[(row_idx, slot[j])] -= gamma * p;
            } else {
                b[(row_idx, 0)] += gamma * p * fixed[j];
                b[(row_idx, 1)] += gamma * p * fixed[j];
            }
        }
        b[(row_idx, 1)] -= cfg.cost(action);
        if let Some(h) = action.intervention() {
            b[(row_idx, 1 + h)] += 1.0;
        }
    }

    let x = if d == 0 {
        DMatrix::zeros(0, cols)
    } else {
        let lu = a.lu();
        let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min_pivot < PIVOT_TOL {
            return Err(Error::SingularSystem);
        }
        lu.solve(&b).ok_or(Error::SingularSystem)?
    };

    let mut out = PolicyEvaluation {
        success: BTreeMap::new(),
        usage: BTreeMap::new(),
        value: BTreeMap::new(),
    };
    for (i, key) in model.states().iter().enumerate() {
        let (s, v, m) = match slot[i] {
            usize::MAX => (fixed[i], fixed[i], vec![0.0; k]),
            r => (x[(r, 0)], x[(r, 1)], (0..k).map(|h| x[(r, 2 + h)]).collect()),
        };
        out.success.insert(key.clone(), s);
        out.value.insert(key.clone(), v);
        out.usage.insert(key.clone(), m);
    }
    Ok(out)
}

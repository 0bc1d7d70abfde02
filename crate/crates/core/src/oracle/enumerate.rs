use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::key::{ActionKind, StateKey};
use crate::model::TransitionModel;
use crate::oracle::policy_eval::exact_policy_eval;
use crate::planner::RewardConfig;

pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// Outcome of evaluating every deterministic stationary policy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub starts: Vec<StateKey>,
    /// Number of policies examined, `prod_s |A(s)|`.
    pub policy_count: usize,
    /// Policies whose evaluation system was singular (only possible at gamma = 1).
    pub improper: usize,
    /// `per_policy[p][j]`: value of policy `p` at `starts[j]`, `None` if improper.
    pub per_policy: Vec<Option<Vec<f64>>>,
    pub best_policy: BTreeMap<StateKey, ActionKind>,
    /// Best policy's value at each start.
    pub best_value: Vec<f64>,
    /// Best policy's value at every state.
    pub best_values_all: BTreeMap<StateKey, f64>,
}

/// Enumerates all deterministic stationary policies over the non-terminal
/// states that have rows, evaluating each exactly.
///
/// The maximizer of the summed value over all such states is reported; an
/// optimal policy maximizes every state's value at once, so it also maximizes
/// the sum. Earlier policies (lower actions at lower-keyed states) win ties
/// within `1e-12`.
pub fn brute_force_optimal(
    model: &TransitionModel,
    cfg: &RewardConfig,
    starts: &[StateKey],
    cap: usize,
) -> Result<EnumerationReport> {
    cfg.validate()?;
    for s in starts {
        if !model.contains(s) {
            return Err(Error::UnknownStart(s.clone()));
        }
    }
    let decision: Vec<usize> = (0..model.len())
        .filter(|&i| !model.key(i).is_terminal() && !model.rows(i).is_empty())
        .collect();
    if decision.len() > cap {
        return Err(Error::EnumerationTooLarge {
            count: decision.len(),
            cap,
        });
    }
    let radix: Vec<usize> = decision.iter().map(|&i| model.rows(i).len()).collect();
    let count: usize = radix.iter().product();

    let policy_at = |mut idx: usize| -> BTreeMap<StateKey, ActionKind> {
        let mut digits = vec![0; radix.len()];
        for (d, r) in digits.iter_mut().zip(&radix).rev() {
            *d = idx % r;
            idx /= r;
        }
        decision
            .iter()
            .zip(digits)
            .map(|(&i, d)| (model.key(i).clone(), model.rows(i)[d].action))
            .collect()
    };

    let evaluated: Vec<Option<(f64, Vec<f64>)>> = (0..count)
        .into_par_iter()
        .map(|idx| {
            let policy = policy_at(idx);
            match exact_policy_eval(model, &policy, cfg, None) {
                Ok(ev) => {
                    let total = decision.iter().map(|&i| ev.value[model.key(i)]).sum();
                    Some((total, starts.iter().map(|s| ev.value[s]).collect()))
                }
                Err(_) => None,
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (idx, e) in evaluated.iter().enumerate() {
        if let Some((total, _)) = e {
            if best.map_or(true, |(_, b)| *total > b + 1e-12) {
                best = Some((idx, *total));
            }
        }
    }
    let (best_idx, _) = best.ok_or(Error::SingularSystem)?;
    let best_policy = policy_at(best_idx);
    let ev = exact_policy_eval(model, &best_policy, cfg, None)?;
    Ok(EnumerationReport {
        starts: starts.to_vec(),
        policy_count: count,
        improper: evaluated.iter().filter(|e| e.is_none()).count(),
        best_value: starts.iter().map(|s| ev.value[s]).collect(),
        per_policy: evaluated.into_iter().map(|e| e.map(|(_, v)| v)).collect(),
        best_policy,
        best_values_all: ev.value,
    })
}

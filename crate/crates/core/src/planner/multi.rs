use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::key::ActionKind;
use crate::model::TransitionModel;
use crate::planner::config::{RewardConfig, ThresholdVariant};
use crate::planner::prepare::{Node, Prepared};
use crate::planner::rules::{literal_prefers_help, TIE_TOL};
use crate::planner::{assemble, Solution, Tables};
use crate::success::SuccessModel;

/// Candidate branch evaluated against the previous iterate.
struct Candidate {
    action: ActionKind,
    usage: Vec<f64>,
    success: f64,
    value: f64,
}

/// Usage/policy iteration with `K` interventions, one usage table per
/// intervention:
///
/// ```text
/// M^i(help_j) = [i == j] + gamma * sum P_help_j(s'|s) M^i(s')
/// M^i(nohelp) =            gamma * sum P_nohelp(s'|s) M^i(s')
/// ```
///
/// Under the literal rule each `help_i` must pass its own ratio test
/// `r_i < dp_i / dM_i`; among passing actions the one with the smallest
/// combined cost `sum_i r_i M^i(a)` wins, nohelp if none passes. Under the
/// value-consistent rule the action maximizing `S(a) - sum_i r_i M^i(a)`
/// wins. Ties go to the lowest action (nohelp, then help1, ...).
pub fn multi_usage_policy_iteration(
    model: &TransitionModel,
    success: &SuccessModel,
    cfg: &RewardConfig,
) -> Result<Solution> {
    let prep = Prepared::new(model, Some(success), cfg)?;
    let k = cfg.interventions();
    let gamma = cfg.gamma;
    let n = model.len();

    // success probabilities per decision state and action slot (literal rule only)
    let mut p_table: Vec<Option<Vec<Option<f64>>>> = vec![None; n];
    if cfg.variant == ThresholdVariant::PaperLiteral {
        for (i, node) in prep.nodes.iter().enumerate() {
            let Node::Decision(actions) = node else { continue };
            let rows = model.rows(i);
            if !rows.iter().any(|r| r.action == ActionKind::NoHelp) || actions.len() < 2 {
                continue;
            }
            let key = model.key(i);
            let mut ps = vec![None; k + 1];
            for &a in actions {
                let action = rows[a].action;
                let p = success.get(key, action).ok_or_else(|| Error::MissingSuccess {
                    state: key.clone(),
                    action,
                })?;
                ps[action.slot()] = Some(p);
            }
            p_table[i] = Some(ps);
        }
    }

    let mut usage = vec![0.0; n * k];
    let mut succ: Vec<f64> = (0..n).map(|i| prep.base_success(i)).collect();
    let mut value = succ.clone();
    let mut policy: Vec<Option<ActionKind>> = prep
        .nodes
        .iter()
        .map(|node| matches!(node, Node::Leaf(_)).then_some(ActionKind::NoHelp))
        .collect();

    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let updates: Vec<Option<Candidate>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let Node::Decision(actions) = &prep.nodes[i] else {
                    return None;
                };
                let rows = model.rows(i);
                let candidates: Vec<Candidate> = actions
                    .iter()
                    .map(|&a| {
                        let row = &rows[a];
                        let own = row.action.intervention();
                        let usage = (0..k)
                            .map(|j| {
                                let future: f64 = row.next.iter().map(|&(t, p)| p * usage[t * k + j]).sum();
                                let immediate = if own == Some(j + 1) { 1.0 } else { 0.0 };
                                immediate + gamma * future
                            })
                            .collect();
                        Candidate {
                            action: row.action,
                            usage,
                            success: gamma * row.expect(&succ),
                            value: -cfg.cost(row.action) + gamma * row.expect(&value),
                        }
                    })
                    .collect();
                let pick = match (&cfg.variant, &p_table[i]) {
                    (ThresholdVariant::PaperLiteral, Some(ps)) => pick_literal(&candidates, ps, &cfg.r),
                    (ThresholdVariant::PaperLiteral, None) => pick_cheapest(&candidates, &cfg.r),
                    (ThresholdVariant::ValueConsistent, _) => pick_best_value(&candidates, &cfg.r),
                };
                candidates.into_iter().nth(pick)
            })
            .collect();

        let mut delta: f64 = 0.0;
        for (i, c) in updates.into_iter().enumerate() {
            let Some(c) = c else { continue };
            for (j, m) in c.usage.iter().enumerate() {
                delta = delta.max((m - usage[i * k + j]).abs());
                usage[i * k + j] = *m;
            }
            delta = delta
                .max((c.success - succ[i]).abs())
                .max((c.value - value[i]).abs());
            succ[i] = c.success;
            value[i] = c.value;
            policy[i] = Some(c.action);
        }
        if delta < cfg.epsilon {
            converged = true;
            break;
        }
    }

    Ok(assemble(
        model,
        cfg,
        Tables {
            k,
            usage,
            success: succ,
            value,
            policy,
        },
        iterations,
        converged,
    ))
}

fn combined_cost(c: &Candidate, r: &[f64]) -> f64 {
    r.iter().zip(&c.usage).map(|(r, m)| r * m).sum()
}

fn pick_best_value(candidates: &[Candidate], r: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (idx, c) in candidates.iter().enumerate() {
        let v = c.success - combined_cost(c, r);
        if v > best_v + TIE_TOL {
            best = idx;
            best_v = v;
        }
    }
    best
}

fn pick_cheapest(candidates: &[Candidate], r: &[f64]) -> usize {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (idx, c) in candidates.iter().enumerate() {
        let cost = combined_cost(c, r);
        if cost < best_cost - TIE_TOL {
            best = idx;
            best_cost = cost;
        }
    }
    best
}

fn pick_literal(candidates: &[Candidate], ps: &[Option<f64>], r: &[f64]) -> usize {
    let Some(base) = candidates.iter().position(|c| c.action == ActionKind::NoHelp) else {
        return pick_cheapest(candidates, r);
    };
    let p_nohelp = ps[0].unwrap_or(0.0);
    let mut best = base;
    let mut best_cost = f64::INFINITY;
    for (idx, c) in candidates.iter().enumerate() {
        let Some(i) = c.action.intervention() else { continue };
        let p_help = ps[i].unwrap_or(0.0);
        let m_help = c.usage[i - 1];
        let m_nohelp = candidates[base].usage[i - 1];
        if !literal_prefers_help(p_help, p_nohelp, m_help, m_nohelp, r[i - 1]) {
            continue;
        }
        let cost = combined_cost(c, r);
        if cost < best_cost - TIE_TOL {
            best = idx;
            best_cost = cost;
        }
    }
    best
}

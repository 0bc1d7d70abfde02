use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::key::ActionKind;
use crate::model::{Row, TransitionModel};
use crate::planner::config::{RewardConfig, ThresholdVariant};
use crate::planner::prepare::{Node, Prepared};
use crate::planner::rules::{literal_prefers_help, prefers_help};
use crate::planner::{assemble, Solution, Tables};
use crate::success::SuccessModel;

struct Branches<'m> {
    nohelp: Option<&'m Row>,
    help: Option<&'m Row>,
    /// `(p_help, p_nohelp)`, only needed by the literal rule.
    p: Option<(f64, f64)>,
}

/// Iterates
///
/// ```text
/// M_help   = 1 + gamma * sum P_help(s'|s) M(s')
/// M_nohelp =     gamma * sum P_nohelp(s'|s) M(s')
/// ```
///
/// together with the matching success branches, picking one branch per state
/// with the configured rule, until the largest change is below `epsilon`.
/// Sweeps are synchronous: every update reads the previous iterate only.
pub fn usage_policy_iteration(
    model: &TransitionModel,
    success: &SuccessModel,
    cfg: &RewardConfig,
) -> Result<Solution> {
    run(model, success, cfg, None)
}

/// Per-sweep diagnostics: largest change and number of states whose action
/// changed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    pub delta: f64,
    pub policy_changes: usize,
}

/// [`usage_policy_iteration`] that also returns one [`Sweep`] per iteration.
pub fn usage_policy_iteration_traced(
    model: &TransitionModel,
    success: &SuccessModel,
    cfg: &RewardConfig,
) -> Result<(Solution, Vec<Sweep>)> {
    let mut trace = Vec::new();
    let sol = run(model, success, cfg, Some(&mut trace))?;
    Ok((sol, trace))
}

fn run(
    model: &TransitionModel,
    success: &SuccessModel,
    cfg: &RewardConfig,
    mut trace: Option<&mut Vec<Sweep>>,
) -> Result<Solution> {
    if cfg.interventions() != 1 {
        return Err(Error::InvalidConfig(format!(
            "single-intervention iteration needs exactly one cost, got {}",
            cfg.interventions()
        )));
    }
    let prep = Prepared::new(model, Some(success), cfg)?;
    let r = cfg.r[0];
    let gamma = cfg.gamma;
    let n = model.len();

    let mut branches: Vec<Option<Branches>> = Vec::with_capacity(n);
    for (i, node) in prep.nodes.iter().enumerate() {
        let Node::Decision(_) = node else {
            branches.push(None);
            continue;
        };
        let nohelp = model.row(i, ActionKind::NoHelp);
        let help = model.row(i, ActionKind::help(1));
        let p = if cfg.variant == ThresholdVariant::PaperLiteral && nohelp.is_some() && help.is_some() {
            let key = model.key(i);
            let lookup = |a: ActionKind| {
                success.get(key, a).ok_or_else(|| Error::MissingSuccess {
                    state: key.clone(),
                    action: a,
                })
            };
            Some((lookup(ActionKind::help(1))?, lookup(ActionKind::NoHelp)?))
        } else {
            None
        };
        branches.push(Some(Branches { nohelp, help, p }));
    }

    let mut usage = vec![0.0; n];
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
        let updates: Vec<Option<(f64, f64, f64, ActionKind)>> = branches
            .par_iter()
            .map(|b| {
                let b = b.as_ref()?;
                let help = b.help.map(|row| {
                    (
                        1.0 + gamma * row.expect(&usage),
                        gamma * row.expect(&succ),
                        -r + gamma * row.expect(&value),
                    )
                });
                let nohelp = b.nohelp.map(|row| {
                    (
                        gamma * row.expect(&usage),
                        gamma * row.expect(&succ),
                        gamma * row.expect(&value),
                    )
                });
                Some(match (help, nohelp) {
                    (Some(h), Some(nh)) => {
                        let take_help = match b.p {
                            Some((p_help, p_nohelp)) => literal_prefers_help(p_help, p_nohelp, h.0, nh.0, r),
                            None => prefers_help(h.1 - nh.1, h.0 - nh.0, r),
                        };
                        if take_help {
                            (h.0, h.1, h.2, ActionKind::help(1))
                        } else {
                            (nh.0, nh.1, nh.2, ActionKind::NoHelp)
                        }
                    }
                    (Some(h), None) => (h.0, h.1, h.2, ActionKind::help(1)),
                    (None, Some(nh)) => (nh.0, nh.1, nh.2, ActionKind::NoHelp),
                    (None, None) => unreachable!("decision state without rows"),
                })
            })
            .collect();

        let mut delta: f64 = 0.0;
        let mut policy_changes = 0;
        for (i, u) in updates.into_iter().enumerate() {
            let Some((m, s, v, a)) = u else { continue };
            policy_changes += usize::from(policy[i] != Some(a));
            delta = delta
                .max((m - usage[i]).abs())
                .max((s - succ[i]).abs())
                .max((v - value[i]).abs());
            usage[i] = m;
            succ[i] = s;
            value[i] = v;
            policy[i] = Some(a);
        }
        if let Some(t) = trace.as_mut() {
            t.push(Sweep { delta, policy_changes });
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
            k: 1,
            usage,
            success: succ,
            value,
            policy,
        },
        iterations,
        converged,
    ))
}

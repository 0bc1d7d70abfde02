//! Shared problem setup: classify every state of the model once.

use crate::error::{Error, Result};
use crate::key::{ActionKind, Outcome};
use crate::model::TransitionModel;
use crate::planner::config::{MissingRows, RewardConfig};
use crate::success::SuccessModel;

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Terminal(Outcome),
    /// Non-terminal state without rows, valued by the success model.
    Leaf(f64),
    /// Indices into `model.rows(i)` of the usable actions, in action order.
    Decision(Vec<usize>),
}

pub(crate) struct Prepared<'a> {
    pub model: &'a TransitionModel,
    pub nodes: Vec<Node>,
}

impl<'a> Prepared<'a> {
    pub fn new(model: &'a TransitionModel, success: Option<&SuccessModel>, cfg: &RewardConfig) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.interventions();
        if model.interventions() > k {
            return Err(Error::InvalidConfig(format!(
                "model has {} intervention(s) but {} cost(s) were given",
                model.interventions(),
                k
            )));
        }
        let mut nodes = Vec::with_capacity(model.len());
        for (i, key) in model.states().iter().enumerate() {
            if let Some(o) = key.terminal() {
                nodes.push(Node::Terminal(o));
                continue;
            }
            let rows = model.rows(i);
            match cfg.missing_rows {
                MissingRows::Reject => {
                    for a in ActionKind::all(k) {
                        if !rows.iter().any(|r| r.action == a) {
                            return Err(Error::MissingRow {
                                state: key.clone(),
                                action: a,
                            });
                        }
                    }
                    nodes.push(Node::Decision((0..rows.len()).collect()));
                }
                MissingRows::Restrict if rows.is_empty() => {
                    let p = success
                        .and_then(|m| m.get(key, ActionKind::NoHelp))
                        .or_else(|| {
                            success.and_then(|m| ActionKind::all(k).find_map(|a| m.get(key, a)))
                        })
                        .unwrap_or(0.0);
                    nodes.push(Node::Leaf(p));
                }
                MissingRows::Restrict => nodes.push(Node::Decision((0..rows.len()).collect())),
            }
        }
        let prepared = Prepared { model, nodes };
        if cfg.gamma >= 1.0 {
            prepared.check_proper()?;
        }
        Ok(prepared)
    }

    /// With gamma = 1 every policy must terminate with probability one.
    ///
    /// Computes the largest set of decision states in which some policy can
    /// stay forever (every member has an action whose whole support stays in
    /// the set). The chain is proper iff that set is empty.
    fn check_proper(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut trapped: Vec<bool> = self
            .nodes
            .iter()
            .map(|node| matches!(node, Node::Decision(_)))
            .collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                if !trapped[i] {
                    continue;
                }
                let Node::Decision(actions) = &self.nodes[i] else { unreachable!() };
                let rows = self.model.rows(i);
                let can_stay = actions
                    .iter()
                    .any(|&a| rows[a].next.iter().all(|&(j, _)| trapped[j]));
                if !can_stay {
                    trapped[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let stuck: Vec<usize> = (0..n).filter(|&i| trapped[i]).collect();
        match stuck.first() {
            None => Ok(()),
            Some(&first) => Err(Error::ImproperChain {
                count: stuck.len(),
                first: self.model.key(first).clone(),
            }),
        }
    }

    /// Initial (or fixed) success value of a node.
    pub fn base_success(&self, i: usize) -> f64 {
        match self.nodes[i] {
            Node::Terminal(o) => o.reward(),
            Node::Leaf(p) => p,
            Node::Decision(_) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::StateKey;

    #[test]
    fn self_loop_is_improper_at_gamma_one() {
        let a = StateKey::named("a");
        let win = StateKey::terminal_named("w", Outcome::Success);
        let model = TransitionModel::from_rows([
            (a.clone(), ActionKind::NoHelp, vec![(a.clone(), 1.0)]),
            (a.clone(), ActionKind::help(1), vec![(win.clone(), 1.0)]),
        ])
        .unwrap();
        let cfg = RewardConfig::single(0.1).with_gamma(1.0);
        let err = Prepared::new(&model, None, &cfg).err().unwrap();
        assert!(err.to_string().contains("improper chain"), "{err}");
        // discounted problems are always fine
        assert!(Prepared::new(&model, None, &cfg.clone().with_gamma(0.9)).is_ok());
    }

    #[test]
    fn leaky_cycle_is_proper() {
        let a = StateKey::named("a");
        let b = StateKey::named("b");
        let win = StateKey::terminal_named("w", Outcome::Success);
        let model = TransitionModel::from_rows([
            (a.clone(), ActionKind::NoHelp, vec![(b.clone(), 0.5), (win.clone(), 0.5)]),
            (a.clone(), ActionKind::help(1), vec![(win.clone(), 1.0)]),
            (b.clone(), ActionKind::NoHelp, vec![(a.clone(), 0.9), (win.clone(), 0.1)]),
            (b.clone(), ActionKind::help(1), vec![(a.clone(), 1.0)]),
        ])
        .unwrap();
        assert!(Prepared::new(&model, None, &RewardConfig::single(0.1).with_gamma(1.0)).is_ok());
    }
}

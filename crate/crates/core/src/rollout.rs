//! Recorded episodes: the data every estimator is fitted from.

use serde::{Deserialize, Serialize};

use crate::key::{ActionKind, Outcome, StateKey};

/// One decision point of an episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: StateKey,
    /// Environment-level action that was executed.
    pub action: String,
    /// 1-based intervention index when an intervention acted, `None` for the base actor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervention: Option<usize>,
}

impl Step {
    pub fn branch(&self) -> ActionKind {
        self.intervention.map_or(ActionKind::NoHelp, ActionKind::help)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub task_id: String,
    pub seed: u64,
    pub steps: Vec<Step>,
    /// State reached after the last step.
    pub final_state: StateKey,
    pub outcome: Option<Outcome>,
    pub length: usize,
}

impl Episode {
    pub fn new(task_id: impl Into<String>, seed: u64, steps: Vec<Step>, final_state: StateKey) -> Self {
        let outcome = final_state.terminal();
        Episode {
            task_id: task_id.into(),
            seed,
            length: steps.len(),
            steps,
            final_state,
            outcome,
        }
    }

    /// `(s, branch, s')` for every step.
    pub fn transitions(&self) -> impl Iterator<Item = (&StateKey, ActionKind, &StateKey)> {
        self.steps.iter().enumerate().map(move |(i, step)| {
            let next = self.steps.get(i + 1).map_or(&self.final_state, |n| &n.state);
            (&step.state, step.branch(), next)
        })
    }

    /// Number of steps at which intervention `i` (1-based) acted.
    pub fn usage(&self, intervention: usize) -> usize {
        self.steps
            .iter()
            .filter(|s| s.intervention == Some(intervention))
            .count()
    }

    pub fn start(&self) -> &StateKey {
        self.steps.first().map_or(&self.final_state, |s| &s.state)
    }

    pub fn succeeded(&self) -> bool {
        self.outcome == Some(Outcome::Success)
    }
}

/// Ordered collection of episodes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RolloutLog {
    pub episodes: Vec<Episode>,
}

impl RolloutLog {
    pub fn new(episodes: Vec<Episode>) -> Self {
        RolloutLog { episodes }
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&StateKey, ActionKind, &StateKey)> {
        self.episodes.iter().flat_map(Episode::transitions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transitions_chain_through_final_state() {
        let a = StateKey::named("a");
        let b = StateKey::named("b");
        let end = StateKey::terminal_named("end", Outcome::Failure);
        let ep = Episode::new(
            "t0",
            1,
            vec![
                Step { state: a.clone(), action: "x".into(), intervention: None },
                Step { state: b.clone(), action: "y".into(), intervention: Some(2) },
            ],
            end.clone(),
        );
        let t: Vec<_> = ep.transitions().collect();
        assert_eq!(t, vec![(&a, ActionKind::NoHelp, &b), (&b, ActionKind::help(2), &end)]);
        assert_eq!(ep.length, 2);
        assert_eq!(ep.outcome, Some(Outcome::Failure));
        assert_eq!(ep.usage(2), 1);
        assert_eq!(ep.usage(1), 0);
    }
}

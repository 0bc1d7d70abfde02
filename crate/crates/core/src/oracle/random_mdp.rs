use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::key::{ActionKind, Outcome, StateKey};
use crate::model::TransitionModel;

/// Parameters of the seeded random test MDPs.
///
/// Every row reaches a terminal with positive probability, so every policy
/// is absorbing even at gamma = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomMdpSpec {
    pub states: usize,
    pub interventions: usize,
    pub min_branch: usize,
    pub max_branch: usize,
    /// Extra weight put on the success terminal by help rows.
    pub help_bias: f64,
    /// Lower bound on any single successor weight before normalization.
    pub min_weight: f64,
}

impl RandomMdpSpec {
    pub fn new(states: usize, interventions: usize) -> Self {
        RandomMdpSpec {
            states,
            interventions,
            min_branch: 2,
            max_branch: 4,
            help_bias: 0.5,
            min_weight: 0.05,
        }
    }
}

fn state_name(i: usize) -> StateKey {
    StateKey::named(&format!("s{i:03}"))
}

fn goal() -> StateKey {
    StateKey::terminal_named("goal", Outcome::Success)
}

fn fail() -> StateKey {
    StateKey::terminal_named("fail", Outcome::Failure)
}

/// Draws a random MDP with `spec.states` non-terminal states named
/// `s000, s001, ...`, plus the terminals `goal` and `fail`, and full rows for
/// nohelp and every help action. Returns the model and its start state `s000`.
pub fn random_mdp(spec: &RandomMdpSpec, seed: u64) -> Result<(TransitionModel, StateKey)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<StateKey> = (0..spec.states).map(state_name).collect();
    let mut pool: Vec<StateKey> = names.clone();
    pool.push(goal());
    pool.push(fail());
    let mut rows = Vec::new();
    for s in &names {
        for a in ActionKind::all(spec.interventions) {
            let b = rng.gen_range(spec.min_branch..=spec.max_branch).min(pool.len());
            let mut next: Vec<StateKey> = pool.choose_multiple(&mut rng, b).cloned().collect();
            if !next.iter().any(StateKey::is_terminal) {
                let t = if rng.gen_bool(0.5) { goal() } else { fail() };
                let last = next.len() - 1;
                next[last] = t;
            }
            let mut dist: Vec<(StateKey, f64)> = next
                .into_iter()
                .map(|s2| {
                    let mut w = rng.gen_range(spec.min_weight..1.0);
                    if a.is_help() && s2 == goal() {
                        w += spec.help_bias;
                    }
                    (s2, w)
                })
                .collect();
            let total: f64 = dist.iter().map(|(_, w)| w).sum();
            for (_, w) in &mut dist {
                *w /= total;
            }
            // absorb round-off so rows sum to 1 within the model tolerance
            let drift: f64 = 1.0 - dist.iter().map(|(_, w)| w).sum::<f64>();
            dist[0].1 += drift;
            rows.push((s.clone(), a, dist));
        }
    }
    let model = TransitionModel::from_rows_with_states(rows, [goal(), fail()])?;
    Ok((model, names[0].clone()))
}

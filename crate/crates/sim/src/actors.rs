//! Action sources. Every actor is a distribution over legal actions so the
//! same code drives sampling and exact model extraction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, EnvConfig, EnvState, Task};

/// Step toward `to` along the ring, exploring on arrival. Equal distances go
/// clockwise.
fn toward(task: &Task, from: usize, to: usize) -> Action {
    let n = task.room_count;
    if from == to {
        return Action::Explore;
    }
    let cw = (to + n - from) % n;
    if cw <= n - cw {
        Action::Go((from + 1) % n)
    } else {
        Action::Go((from + n - 1) % n)
    }
}

/// Nearest room in `rooms` (lowest index on ties).
fn nearest(task: &Task, from: usize, rooms: impl Iterator<Item = usize>) -> Option<usize> {
    rooms.min_by_key(|&r| (task.distance(from, r), r))
}

/// What the base actor does without noise: search the nearest unexplored
/// hint room; once every hint room has been explored, keep cycling through
/// them clockwise. It never looks outside the hint.
pub fn base_greedy(task: &Task, state: &EnvState) -> Action {
    if let Some(r) = nearest(task, state.room, task.hint.iter().copied().filter(|&r| !state.explored(r))) {
        return toward(task, state.room, r);
    }
    let n = task.room_count;
    let next = (1..=n)
        .map(|d| (state.room + d) % n)
        .find(|r| task.hint.contains(r))
        .expect("hint is non-empty");
    toward(task, state.room, next)
}

/// Heads for wherever the object currently is.
pub fn strong_greedy(task: &Task, state: &EnvState) -> Action {
    toward(task, state.room, task.object_at(state.elapsed))
}

/// `(1 - eta)` on `greedy`, the rest spread uniformly over legal actions.
pub fn noisy(task: &Task, state: &EnvState, greedy: Action, eta: f64) -> Vec<(Action, f64)> {
    let legal = task.legal_actions(state);
    let share = eta / legal.len() as f64;
    legal
        .into_iter()
        .map(|a| (a, if a == greedy { 1.0 - eta + share } else { share }))
        .filter(|(_, p)| *p > 0.0)
        .collect()
}

/// Noise actually applied at `temperature`: `eta + (1 - eta) * temperature`.
pub fn effective_eta(eta: f64, temperature: f64) -> f64 {
    eta + (1.0 - eta) * temperature
}

pub fn base_distribution(cfg: &EnvConfig, task: &Task, state: &EnvState, temperature: f64) -> Vec<(Action, f64)> {
    noisy(task, state, base_greedy(task, state), effective_eta(cfg.eta, temperature))
}

pub fn strong_distribution(cfg: &EnvConfig, task: &Task, state: &EnvState) -> Vec<(Action, f64)> {
    noisy(task, state, strong_greedy(task, state), cfg.eta_strong)
}

/// Inverse-CDF draw using exactly one uniform.
pub fn sample<R: Rng>(dist: &[(Action, f64)], rng: &mut R) -> Action {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(a, p) in dist {
        acc += p;
        if u < acc {
            return a;
        }
    }
    dist.last().expect("non-empty distribution").0
}

pub fn base_actor<R: Rng>(cfg: &EnvConfig, task: &Task, state: &EnvState, temperature: f64, rng: &mut R) -> Action {
    sample(&base_distribution(cfg, task, state, temperature), rng)
}

pub fn strong_actor<R: Rng>(cfg: &EnvConfig, task: &Task, state: &EnvState, rng: &mut R) -> Action {
    sample(&strong_distribution(cfg, task, state), rng)
}

/// Intervention sources, in the order they are numbered `help1, help2, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Intervention {
    Strong,
    Mcts,
}

impl std::str::FromStr for Intervention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strong" => Ok(Intervention::Strong),
            "mcts" => Ok(Intervention::Mcts),
            other => Err(format!("unknown intervention `{other}` (strong | mcts)")),
        }
    }
}

/// Parses `strong`, `mcts` or `both` (strong first).
pub fn parse_interventions(s: &str) -> Result<Vec<Intervention>, String> {
    match s {
        "both" => Ok(vec![Intervention::Strong, Intervention::Mcts]),
        single => Ok(vec![single.parse()?]),
    }
}

//! Depth-1 tree search intervention: propose candidates from the base actor,
//! score them, pick by UCT.

use std::collections::HashMap;

use rand::Rng;

use crate::actors::{base_distribution, sample};
use crate::env::{Action, EnvConfig, EnvState, Task};
use crate::error::{Result, SimError};

/// Visit and proposal counts of one task.
#[derive(Clone, Debug, Default)]
pub struct UctCounts {
    visits: HashMap<EnvState, u64>,
    chosen: HashMap<(EnvState, Action), u64>,
}

/// Weight given to an action executed without search.
pub const NON_SEARCH_WEIGHT: u64 = 5;

impl UctCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn visits(&self, s: &EnvState) -> u64 {
        self.visits.get(s).copied().unwrap_or(0)
    }

    pub fn count(&self, s: &EnvState, a: Action) -> u64 {
        self.chosen.get(&(*s, a)).copied().unwrap_or(0)
    }

    /// Adds `weight` to both `N(s)` and `N(s, a)`.
    pub fn record(&mut self, s: &EnvState, a: Action, weight: u64) {
        *self.visits.entry(*s).or_default() += weight;
        *self.chosen.entry((*s, a)).or_default() += weight;
    }

    /// Sum of `N(s, a)` over actions.
    pub fn chosen_total(&self, s: &EnvState) -> u64 {
        self.chosen.iter().filter(|((x, _), _)| x == s).map(|(_, n)| n).sum()
    }
}

/// Picks the candidate maximizing `q + c * sqrt(ln N(s) / max(N(s,a), 1))`
/// after counting this visit. Ties go to the earliest candidate. The chosen
/// action's count is incremented.
pub fn mcts_intervene(
    state: &EnvState,
    candidates: &[Action],
    q: impl Fn(Action) -> f64,
    counts: &mut UctCounts,
    c: f64,
) -> Result<Action> {
    if candidates.is_empty() {
        return Err(SimError::NoCandidates);
    }
    *counts.visits.entry(*state).or_default() += 1;
    let ln_n = (counts.visits(state) as f64).ln();
    let mut best = (f64::NEG_INFINITY, candidates[0]);
    for &a in candidates {
        let n_sa = counts.count(state, a).max(1) as f64;
        let uct = q(a) + c * (ln_n / n_sa).sqrt();
        if uct > best.0 {
            best = (uct, a);
        }
    }
    *counts.chosen.entry((*state, best.1)).or_default() += 1;
    Ok(best.1)
}

/// Exact success probability of the base actor (temperature 0) from each
/// state of one task, memoized.
pub struct BaseValues<'a> {
    cfg: &'a EnvConfig,
    task: &'a Task,
    memo: HashMap<EnvState, f64>,
}

impl<'a> BaseValues<'a> {
    pub fn new(cfg: &'a EnvConfig, task: &'a Task) -> Self {
        BaseValues {
            cfg,
            task,
            memo: HashMap::new(),
        }
    }

    pub fn success(&mut self, s: &EnvState) -> f64 {
        if let Some(o) = s.status {
            return o.reward();
        }
        if let Some(&v) = self.memo.get(s) {
            return v;
        }
        let mut v = 0.0;
        for (a, p) in base_distribution(self.cfg, self.task, s, 0.0) {
            let next = self.task.step(s, a).expect("actors only emit legal actions");
            v += p * self.success(&next);
        }
        self.memo.insert(*s, v);
        v
    }

    /// Score of taking `a` at `s`: base-actor success of the successor plus a
    /// fixed pseudo-random perturbation, clamped to `[0, 1]`.
    pub fn q(&mut self, s: &EnvState, a: Action) -> f64 {
        let next = self.task.step(s, a).expect("candidates are legal");
        let exact = self.success(&next);
        let key = self.task.key(s);
        let h = fnv1a(format!("{key}|{a}").as_bytes());
        let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
        (exact + self.cfg.mcts.q_noise * (2.0 * unit - 1.0)).clamp(0.0, 1.0)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3))
}

/// Samples the candidates for one search decision.
pub fn propose<R: Rng>(cfg: &EnvConfig, task: &Task, state: &EnvState, rng: &mut R) -> Vec<Action> {
    let dist = base_distribution(cfg, task, state, cfg.mcts.temperature);
    (0..cfg.mcts.k).map(|_| sample(&dist, rng)).collect()
}

/// Exact action law of one search decision with fresh counts, by enumerating
/// every candidate sequence. With fresh counts the exploration bonus is zero,
/// so the first candidate with the highest score wins.
pub fn mcts_distribution(
    cfg: &EnvConfig,
    task: &Task,
    state: &EnvState,
    values: &mut BaseValues,
) -> Result<Vec<(Action, f64)>> {
    let dist = base_distribution(cfg, task, state, cfg.mcts.temperature);
    let k = cfg.mcts.k as u32;
    let combos = (dist.len() as u64).checked_pow(k).filter(|c| *c <= 1_000_000).ok_or_else(|| {
        SimError::Config(format!("mcts: {} candidates over {} actions is too many to enumerate", k, dist.len()))
    })?;
    let q: Vec<f64> = dist.iter().map(|(a, _)| values.q(state, *a)).collect();
    let mut law = vec![0.0; dist.len()];
    for mut code in 0..combos {
        let mut prob = 1.0;
        let mut best: Option<usize> = None;
        for _ in 0..k {
            let j = (code % dist.len() as u64) as usize;
            code /= dist.len() as u64;
            prob *= dist[j].1;
            if best.map_or(true, |b| q[j] > q[b]) {
                best = Some(j);
            }
        }
        law[best.expect("k >= 1")] += prob;
    }
    Ok(dist.iter().zip(law).map(|((a, _), p)| (*a, p)).filter(|(_, p)| *p > 0.0).collect())
}

//! Running one episode: a controller decides per step whether an
//! intervention acts, the chosen actor samples an action, the task steps.

use helpdp_core::{Episode, Step, StateKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actors::{base_actor, strong_actor, Intervention};
use crate::env::{EnvConfig, EnvState, Task};
use crate::error::{Result, SimError};
use crate::mcts::{mcts_intervene, propose, BaseValues, UctCounts, NON_SEARCH_WEIGHT};

/// Environment parameters plus the interventions numbered `help1, help2, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Env {
    pub cfg: EnvConfig,
    pub interventions: Vec<Intervention>,
}

impl Env {
    pub fn new(cfg: EnvConfig, interventions: Vec<Intervention>) -> Result<Self> {
        cfg.validate()?;
        if interventions.is_empty() {
            return Err(SimError::Config("at least one intervention is required".into()));
        }
        Ok(Env { cfg, interventions })
    }

    pub fn k(&self) -> usize {
        self.interventions.len()
    }

    fn uses_search(&self) -> bool {
        self.interventions.contains(&Intervention::Mcts)
    }
}

/// Per-step choice between the base actor and an intervention.
pub trait Controller {
    /// 1-based intervention index, or `None` for the base actor. `rng` is a
    /// stream reserved for the controller.
    fn decide(&mut self, task: &Task, state: &EnvState, key: &StateKey, step: usize, rng: &mut ChaCha8Rng)
        -> Result<Option<usize>>;
}

/// Always the same answer.
pub struct Fixed(pub Option<usize>);

impl Controller for Fixed {
    fn decide(&mut self, _: &Task, _: &EnvState, _: &StateKey, _: usize, _: &mut ChaCha8Rng) -> Result<Option<usize>> {
        Ok(self.0)
    }
}

/// Fires intervention `i` with probability `probs[i - 1]`, at most one per
/// step. Draws exactly one uniform per step.
pub struct Scheduled(pub Vec<f64>);

impl Controller for Scheduled {
    fn decide(&mut self, _: &Task, _: &EnvState, _: &StateKey, _: usize, rng: &mut ChaCha8Rng) -> Result<Option<usize>> {
        let u: f64 = rand::Rng::gen(rng);
        let mut acc = 0.0;
        for (i, p) in self.0.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(Some(i + 1));
            }
        }
        Ok(None)
    }
}

/// Mixes a base seed with any number of labels (splitmix64 finalizer).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = base;
    for &p in parts {
        h ^= p.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

/// Runs episodes of one task, keeping its search counts and exact base
/// values across episodes.
pub struct TaskRunner<'a> {
    env: &'a Env,
    task: &'a Task,
    pub counts: UctCounts,
    values: BaseValues<'a>,
}

impl<'a> TaskRunner<'a> {
    pub fn new(env: &'a Env, task: &'a Task) -> Self {
        TaskRunner {
            env,
            task,
            counts: UctCounts::new(),
            values: BaseValues::new(&env.cfg, task),
        }
    }

    pub fn task(&self) -> &Task {
        self.task
    }

    /// Exact base-actor success from `state`.
    pub fn base_success(&mut self, state: &EnvState) -> f64 {
        self.values.success(state)
    }

    /// One action by the base actor (`None`) or intervention `i`.
    pub fn act(&mut self, state: &EnvState, who: Option<usize>, rng: &mut ChaCha8Rng) -> Result<crate::env::Action> {
        let cfg = &self.env.cfg;
        let source = match who {
            None => None,
            Some(i) => Some(*self.env.interventions.get(i.wrapping_sub(1)).ok_or(SimError::UnknownIntervention {
                index: i,
                available: self.env.k(),
            })?),
        };
        let action = match source {
            None => base_actor(cfg, self.task, state, 0.0, rng),
            Some(Intervention::Strong) => strong_actor(cfg, self.task, state, rng),
            Some(Intervention::Mcts) => {
                let candidates = propose(cfg, self.task, state, rng);
                let values = &mut self.values;
                let scores: Vec<f64> = candidates.iter().map(|a| values.q(state, *a)).collect();
                let q = |a| scores[candidates.iter().position(|c| *c == a).expect("candidate")];
                return mcts_intervene(state, &candidates, q, &mut self.counts, cfg.mcts.c);
            }
        };
        if self.env.uses_search() {
            self.counts.record(state, action, NON_SEARCH_WEIGHT);
        }
        Ok(action)
    }

    /// Plays from the start until a terminal state.
    pub fn run(&mut self, ctrl: &mut dyn Controller, seed: u64) -> Result<Episode> {
        self.run_from(ctrl, seed, self.task.start(), 0)
    }

    /// Plays from `state`, numbering steps from `first_step`.
    pub fn run_from(&mut self, ctrl: &mut dyn Controller, seed: u64, mut state: EnvState, first_step: usize) -> Result<Episode> {
        let mut actor_rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ctrl_rng = ChaCha8Rng::seed_from_u64(seed);
        ctrl_rng.set_stream(1);
        let mut steps = Vec::new();
        while !state.is_terminal() {
            let key = self.task.key(&state);
            let who = ctrl.decide(self.task, &state, &key, first_step + steps.len(), &mut ctrl_rng)?;
            let action = self.act(&state, who, &mut actor_rng)?;
            steps.push(Step {
                state: key,
                action: action.to_string(),
                intervention: who,
            });
            state = self.task.step(&state, action)?;
        }
        Ok(Episode::new(self.task.task_id.clone(), seed, steps, self.task.key(&state)))
    }
}

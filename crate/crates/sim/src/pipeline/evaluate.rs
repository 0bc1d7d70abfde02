use helpdp_core::planner::Solution;
use helpdp_core::{Episode, StateKey, SuccessModel};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{EnvState, Task};
use crate::episode::{derive_seed, Controller, Env, Fixed, Scheduled, TaskRunner};
use crate::error::{Result, SimError};
use crate::pipeline::baselines::{difficulty, TaskwiseVariant};
use crate::pipeline::helper::HelperPolicy;

/// Deployment-time behavior being evaluated.
#[derive(Clone, Copy, Debug)]
pub enum Behavior<'a> {
    /// Always the base actor (`None`) or always one intervention.
    Fixed(Option<usize>),
    /// Intervention `i` fires with probability `probs[i - 1]` at each step.
    Random(&'a [f64]),
    Helper(&'a HelperPolicy),
    /// Intervene with `intervention` wherever `1 - p(s, nohelp)` exceeds the threshold.
    Statewise {
        success: &'a SuccessModel,
        threshold: f64,
        intervention: usize,
    },
    Taskwise {
        variant: TaskwiseVariant,
        success: &'a SuccessModel,
        threshold: f64,
        intervention: usize,
    },
}

struct HelperCtrl<'a>(&'a HelperPolicy);

impl Controller for HelperCtrl<'_> {
    fn decide(&mut self, _: &Task, _: &EnvState, key: &StateKey, _: usize, _: &mut ChaCha8Rng) -> Result<Option<usize>> {
        Ok(self.0.action(key).intervention())
    }
}

struct StatewiseCtrl<'a> {
    success: &'a SuccessModel,
    threshold: f64,
    intervention: usize,
}

impl Controller for StatewiseCtrl<'_> {
    fn decide(&mut self, _: &Task, _: &EnvState, key: &StateKey, _: usize, _: &mut ChaCha8Rng) -> Result<Option<usize>> {
        Ok(difficulty(self.success, key)
            .filter(|d| *d > self.threshold)
            .map(|_| self.intervention))
    }
}

/// Base actor for the first steps; from `switch_at` on, intervention
/// `intervention` if the hardest state seen before then exceeds the threshold.
struct FirstStepsCtrl<'a> {
    success: &'a SuccessModel,
    threshold: f64,
    intervention: usize,
    switch_at: usize,
    score: f64,
}

impl Controller for FirstStepsCtrl<'_> {
    fn decide(&mut self, _: &Task, _: &EnvState, key: &StateKey, step: usize, _: &mut ChaCha8Rng) -> Result<Option<usize>> {
        if step < self.switch_at {
            if let Some(d) = difficulty(self.success, key) {
                self.score = self.score.max(d);
            }
            return Ok(None);
        }
        Ok((self.score > self.threshold).then_some(self.intervention))
    }
}

/// Outcome of one evaluated episode (possibly a base run plus a restart).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub success: bool,
    pub length: usize,
    pub optimal_length: usize,
    /// Raw intervention counts per intervention.
    pub usage: Vec<usize>,
    /// `sum_t gamma^t [help_i at t]`.
    pub discounted_usage: Vec<f64>,
    /// `gamma^T` on success, else 0, over the run that decided the outcome.
    pub discounted_success: f64,
}

impl EpisodeResult {
    fn from_episode(ep: &Episode, task: &Task, k: usize, gamma: f64, extra_length: usize) -> Self {
        let mut usage = vec![0; k];
        let mut discounted_usage = vec![0.0; k];
        let mut w = 1.0;
        for step in &ep.steps {
            if let Some(i) = step.intervention {
                usage[i - 1] += 1;
                discounted_usage[i - 1] += w;
            }
            w *= gamma;
        }
        EpisodeResult {
            task_id: ep.task_id.clone(),
            success: ep.succeeded(),
            length: ep.length + extra_length,
            optimal_length: task.optimal_length,
            usage,
            discounted_usage,
            discounted_success: if ep.succeeded() { w } else { 0.0 },
        }
    }

    /// `success * optimal / max(length, optimal)`.
    pub fn spl(&self) -> f64 {
        if self.success {
            self.optimal_length as f64 / self.length.max(self.optimal_length) as f64
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub episodes: usize,
    pub sr: f64,
    pub sr_se: f64,
    pub spl: f64,
    /// Mean episode length.
    pub l: f64,
    /// Mean raw interventions per episode, per intervention.
    pub u: Vec<f64>,
    pub u_se: Vec<f64>,
    pub discounted_u: Vec<f64>,
    pub discounted_u_se: Vec<f64>,
    pub discounted_sr: f64,
    pub discounted_sr_se: f64,
    /// Planner prediction for the evaluated tasks, if attached.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_success: Option<f64>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

impl Metrics {
    pub fn from_results(results: &[EpisodeResult], k: usize) -> Metrics {
        let col = |f: &dyn Fn(&EpisodeResult) -> f64| results.iter().map(f).collect::<Vec<f64>>();
        let (sr, sr_se) = mean_se(&col(&|r| f64::from(u8::from(r.success))));
        let (discounted_sr, discounted_sr_se) = mean_se(&col(&|r| r.discounted_success));
        let (u, u_se) = (0..k).map(|i| mean_se(&col(&|r| r.usage[i] as f64))).unzip();
        let (discounted_u, discounted_u_se) = (0..k).map(|i| mean_se(&col(&|r| r.discounted_usage[i]))).unzip();
        Metrics {
            episodes: results.len(),
            sr,
            sr_se,
            spl: mean_se(&col(&|r| r.spl())).0,
            l: mean_se(&col(&|r| r.length as f64)).0,
            u,
            u_se,
            discounted_u,
            discounted_u_se,
            discounted_sr,
            discounted_sr_se,
            eu: None,
            predicted_success: None,
        }
    }

    pub fn total_u(&self) -> f64 {
        self.u.iter().sum()
    }

    /// Attaches the planner's prediction for `tasks`.
    pub fn with_expectation(mut self, sol: &Solution, tasks: &[Task]) -> Self {
        let (eu, s) = planner_expectation(sol, tasks);
        self.eu = Some(eu);
        self.predicted_success = Some(s);
        self
    }
}

/// Mean start-state usage and success of `sol` over `tasks`. Starts outside
/// the solution count as zero usage and zero success: the deployed helper
/// falls back to nohelp there and the planner knows nothing.
pub fn planner_expectation(sol: &Solution, tasks: &[Task]) -> (Vec<f64>, f64) {
    let k = sol.interventions();
    let mut eu = vec![0.0; k];
    let mut s = 0.0;
    for t in tasks {
        let key = t.key(&t.start());
        if let Some(m) = sol.usage.get(&key) {
            for (e, v) in eu.iter_mut().zip(m) {
                *e += v;
            }
        }
        s += sol.success.get(&key).copied().unwrap_or(0.0);
    }
    let n = tasks.len().max(1) as f64;
    (eu.into_iter().map(|e| e / n).collect(), s / n)
}

/// Runs every task `n_seeds` times under `behavior`.
///
/// Episode seeds depend only on `seed`, the task position and the
/// repetition, so two behaviors evaluated with the same seed see the same
/// actor randomness.
pub fn evaluate(env: &Env, behavior: Behavior, tasks: &[Task], n_seeds: usize, seed: u64, gamma: f64) -> Result<(Metrics, Vec<EpisodeResult>)> {
    if tasks.is_empty() {
        return Err(SimError::EmptyTaskset);
    }
    let check = |i: usize| {
        if i == 0 || i > env.k() {
            Err(SimError::UnknownIntervention { index: i, available: env.k() })
        } else {
            Ok(())
        }
    };
    match behavior {
        Behavior::Fixed(Some(i)) => check(i)?,
        Behavior::Random(p) if p.len() != env.k() => {
            return Err(SimError::Config(format!("{} random probabilities for {} interventions", p.len(), env.k())))
        }
        Behavior::Helper(h) => {
            for a in h.table.values().chain([&h.fallback]) {
                if let Some(i) = a.intervention() {
                    check(i)?;
                }
            }
            if let Some(rule) = &h.threshold_fallback {
                check(rule.intervention)?;
            }
        }
        Behavior::Statewise { intervention, .. } | Behavior::Taskwise { intervention, .. } => check(intervention)?,
        _ => {}
    }

    let per_task: Vec<Result<Vec<EpisodeResult>>> = tasks
        .par_iter()
        .enumerate()
        .map(|(ti, task)| {
            let mut runner = TaskRunner::new(env, task);
            (0..n_seeds)
                .map(|rep| {
                    run_behavior(&mut runner, behavior, eval_seed(seed, ti, rep), env.k(), gamma)
                })
                .collect()
        })
        .collect();
    let mut results = Vec::with_capacity(tasks.len() * n_seeds);
    for r in per_task {
        results.extend(r?);
    }
    Ok((Metrics::from_results(&results, env.k()), results))
}

/// Seed of repetition `rep` of the task at position `task_index`.
pub(crate) fn eval_seed(seed: u64, task_index: usize, rep: usize) -> u64 {
    derive_seed(seed, &[2, task_index as u64, rep as u64])
}

fn run_behavior(runner: &mut TaskRunner, behavior: Behavior, seed: u64, k: usize, gamma: f64) -> Result<EpisodeResult> {
    let task = runner.task().clone();
    let ep = match behavior {
        Behavior::Fixed(who) => runner.run(&mut Fixed(who), seed)?,
        Behavior::Random(p) => runner.run(&mut Scheduled(p.to_vec()), seed)?,
        Behavior::Helper(h) => runner.run(&mut HelperCtrl(h), seed)?,
        Behavior::Statewise { success, threshold, intervention } => runner.run(
            &mut StatewiseCtrl { success, threshold, intervention },
            seed,
        )?,
        Behavior::Taskwise { variant: TaskwiseVariant::FirstFive, success, threshold, intervention } => runner.run(
            &mut FirstStepsCtrl {
                success,
                threshold,
                intervention,
                switch_at: TaskwiseVariant::FIRST_STEPS + 1,
                score: f64::NEG_INFINITY,
            },
            seed,
        )?,
        Behavior::Taskwise { variant: TaskwiseVariant::AllSteps, success, threshold, intervention } => {
            let first = runner.run(&mut Fixed(None), seed)?;
            let score = first
                .steps
                .iter()
                .filter_map(|s| difficulty(success, &s.state))
                .fold(f64::NEG_INFINITY, f64::max);
            if score > threshold {
                // restart from the beginning with the intervention in control
                let again = runner.run(&mut Fixed(Some(intervention)), derive_seed(seed, &[3]))?;
                return Ok(EpisodeResult::from_episode(&again, &task, k, gamma, first.length));
            }
            first
        }
    };
    Ok(EpisodeResult::from_episode(&ep, &task, k, gamma, 0))
}

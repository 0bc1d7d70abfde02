use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::key::{ActionKind, StateKey};
use crate::model::TransitionModel;
use crate::success::SuccessModel;

/// One simulated episode.
#[derive(Clone, Debug, PartialEq)]
pub struct McSample {
    pub success: f64,
    /// Per-intervention counts, raw or discounted as the sampler chooses.
    pub usage: Vec<f64>,
    pub length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n: usize,
    pub success_mean: f64,
    pub success_se: f64,
    pub usage_mean: Vec<f64>,
    pub usage_se: Vec<f64>,
    pub length_mean: f64,
}

impl McEstimate {
    pub fn total_usage(&self) -> f64 {
        self.usage_mean.iter().sum()
    }
}

/// `(mean, sample std / sqrt(n))`, the std using `n - 1`.
fn mean_se(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs `sample` `n` times. Episode `i` gets its own generator seeded from
/// `seed` on stream `i`, so results do not depend on the worker count.
pub fn monte_carlo_estimate<F>(n: usize, seed: u64, sample: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> McSample + Sync,
{
    assert!(n >= 1, "at least one sample is required");
    let samples: Vec<McSample> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            sample(&mut rng)
        })
        .collect();
    let k = samples.iter().map(|s| s.usage.len()).max().unwrap_or(0);
    let (success_mean, success_se) = mean_se(samples.iter().map(|s| s.success), n);
    let (usage_mean, usage_se) = (0..k)
        .map(|i| mean_se(samples.iter().map(move |s| s.usage.get(i).copied().unwrap_or(0.0)), n))
        .unzip();
    let length_mean = samples.iter().map(|s| s.length as f64).sum::<f64>() / n as f64;
    McEstimate {
        n,
        success_mean,
        success_se,
        usage_mean,
        usage_se,
        length_mean,
    }
}

/// Follows `policy` through `model` from `start`.
///
/// Success and help counts are discounted by `gamma^t`, matching the
/// planner's `S` and `M`. Row-less states end the episode with a success
/// draw from `leaves(s, nohelp)`. Episodes still running after `max_steps`
/// count as failures.
#[allow(clippy::too_many_arguments)]
pub fn simulate_policy<R: Rng>(
    model: &TransitionModel,
    policy: &BTreeMap<StateKey, ActionKind>,
    start: &StateKey,
    interventions: usize,
    gamma: f64,
    max_steps: usize,
    leaves: Option<&SuccessModel>,
    rng: &mut R,
) -> McSample {
    let mut usage = vec![0.0; interventions];
    let mut weight = 1.0;
    let Some(mut i) = model.index_of(start) else {
        return McSample { success: 0.0, usage, length: 0 };
    };
    for t in 0..max_steps {
        let key = model.key(i);
        if let Some(o) = key.terminal() {
            return McSample { success: weight * o.reward(), usage, length: t };
        }
        let action = policy.get(key).copied().unwrap_or(ActionKind::NoHelp);
        let Some(row) = model.row(i, action) else {
            let p = leaves.and_then(|m| m.get(key, ActionKind::NoHelp)).unwrap_or(0.0);
            let won = rng.gen::<f64>() < p;
            return McSample { success: if won { weight } else { 0.0 }, usage, length: t };
        };
        if let Some(h) = action.intervention() {
            usage[h - 1] += weight;
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = row.next.last().map_or(i, |&(j, _)| j);
        for &(j, p) in &row.next {
            acc += p;
            if u < acc {
                next = j;
                break;
            }
        }
        i = next;
        weight *= gamma;
    }
    let success = model.key(i).terminal().map_or(0.0, |o| weight * o.reward());
    McSample { success, usage, length: max_steps }
}

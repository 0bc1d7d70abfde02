use std::collections::BTreeSet;

use helpdp_core::{CountTable, Episode, RolloutLog, StateKey};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::env::Task;
use crate::episode::{derive_seed, Env, Scheduled, TaskRunner};
use crate::error::{Result, SimError};

/// Per-step trigger probabilities of the single-intervention sweep.
pub const SWEEP_PROBABILITIES: [f64; 7] = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0];

const PAIRS: [[f64; 2]; 4] = [[0.1, 0.1], [0.3, 0.3], [0.1, 0.3], [0.3, 0.1]];

/// Trigger probabilities per intervention for each schedule entry.
///
/// With one intervention this is the plain sweep. With two, each
/// intervention is swept alone (sharing one all-zero entry) and the four
/// mixed pairs are appended.
pub fn default_schedule(k: usize) -> Vec<Vec<f64>> {
    match k {
        1 => SWEEP_PROBABILITIES.iter().map(|p| vec![*p]).collect(),
        _ => {
            let mut out = vec![vec![0.0; k]];
            for i in 0..k {
                for p in SWEEP_PROBABILITIES.iter().skip(1) {
                    let mut entry = vec![0.0; k];
                    entry[i] = *p;
                    out.push(entry);
                }
            }
            if k == 2 {
                out.extend(PAIRS.iter().map(|p| p.to_vec()));
            }
            out
        }
    }
}

/// One episode per task, schedule entry and repetition seed.
///
/// Episodes come out ordered by task, then entry, then seed, whatever the
/// worker count. Episodes of a task run in that order on one worker because
/// they share search counts.
pub fn collect_phase1(env: &Env, tasks: &[Task], schedule: &[Vec<f64>], seeds: &[u64], base_seed: u64) -> Result<RolloutLog> {
    if tasks.is_empty() {
        return Err(SimError::EmptyTaskset);
    }
    for entry in schedule {
        if entry.len() != env.k() || entry.iter().any(|p| !(0.0..=1.0).contains(p)) || entry.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(SimError::Config(format!(
                "schedule entry {entry:?} needs {} probabilities summing to at most 1",
                env.k()
            )));
        }
    }
    let per_task: Vec<Result<Vec<Episode>>> = tasks
        .par_iter()
        .enumerate()
        .map(|(ti, task)| {
            let mut runner = TaskRunner::new(env, task);
            let mut out = Vec::with_capacity(schedule.len() * seeds.len());
            for (ei, entry) in schedule.iter().enumerate() {
                for &s in seeds {
                    let seed = derive_seed(base_seed, &[1, ti as u64, ei as u64, s]);
                    out.push(runner.run(&mut Scheduled(entry.clone()), seed)?);
                }
            }
            Ok(out)
        })
        .collect();
    let mut episodes = Vec::new();
    for r in per_task {
        episodes.extend(r?);
    }
    Ok(RolloutLog::new(episodes))
}

/// Keeps transitions out of a random `fraction` of the non-terminal source
/// states, simulating partial Phase-1 coverage. Returns the kept states.
pub fn truncate_coverage(table: &mut CountTable, fraction: f64, seed: u64) -> BTreeSet<StateKey> {
    let sources: BTreeSet<StateKey> = table.rows().map(|(s, _, _)| s.clone()).collect();
    let mut order: Vec<StateKey> = sources.into_iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let keep_n = (fraction.clamp(0.0, 1.0) * order.len() as f64).round() as usize;
    let keep: BTreeSet<StateKey> = order.into_iter().take(keep_n).collect();
    table.retain_sources(|s| keep.contains(s));
    keep
}

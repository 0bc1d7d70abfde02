use helpdp_core::StateKey;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Non-terminal states of one trajectory and whether it succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct Labeled {
    pub states: Vec<StateKey>,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfRegReport {
    /// Trajectories scoring below this are predicted to succeed.
    pub threshold: f64,
    pub val_accuracy: f64,
    pub accuracy: f64,
    /// Success is the positive class; 0 when nothing is predicted positive.
    pub precision: f64,
    /// 0 when the test set has no successes.
    pub recall: f64,
    pub test_size: usize,
}

/// Largest `1 - p(s)` over the trajectory's non-terminal states. States the
/// scorer does not know are skipped; an empty trajectory scores 0.
pub fn trajectory_score(states: &[StateKey], p: &dyn Fn(&StateKey) -> Option<f64>) -> f64 {
    states.iter().filter_map(|s| p(s)).map(|p| 1.0 - p).fold(0.0, f64::max)
}

fn accuracy(scored: &[(f64, bool)], threshold: f64) -> f64 {
    let hits = scored.iter().filter(|(s, y)| (*s < threshold) == *y).count();
    hits as f64 / scored.len() as f64
}

/// Chooses the threshold with the best validation accuracy among the
/// midpoints of consecutive distinct scores plus one point below and one
/// above all scores (first best wins), then reports test metrics.
pub fn self_regulation_eval(p: &dyn Fn(&StateKey) -> Option<f64>, val: &[Labeled], test: &[Labeled]) -> Result<SelfRegReport> {
    if val.is_empty() {
        return Err(SimError::EmptyValidation);
    }
    if val.iter().all(|l| l.success) || val.iter().all(|l| !l.success) {
        return Err(SimError::SingleClass);
    }
    let score = |set: &[Labeled]| -> Vec<(f64, bool)> {
        set.iter().map(|l| (trajectory_score(&l.states, p), l.success)).collect()
    };
    let val_scored = score(val);
    let mut distinct: Vec<f64> = val_scored.iter().map(|(s, _)| *s).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut candidates = vec![distinct[0] - 1.0];
    candidates.extend(distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    candidates.push(distinct[distinct.len() - 1] + 1.0);

    let mut best = (candidates[0], accuracy(&val_scored, candidates[0]));
    for &c in &candidates[1..] {
        let acc = accuracy(&val_scored, c);
        if acc > best.1 {
            best = (c, acc);
        }
    }

    let test_scored = score(test);
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for &(s, y) in &test_scored {
        match (s < best.0, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(SelfRegReport {
        threshold: best.0,
        val_accuracy: best.1,
        accuracy: if test_scored.is_empty() { 0.0 } else { accuracy(&test_scored, best.0) },
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        test_size: test_scored.len(),
    })
}

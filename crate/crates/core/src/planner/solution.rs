use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::key::{ActionKind, StateKey};
use crate::planner::config::ThresholdVariant;

/// Converged (or abandoned) fixed point of usage/policy iteration.
///
/// `usage[s][i]` is the expected discounted number of calls to intervention
/// `i + 1` from `s`, `success[s]` the discounted success probability and
/// `value[s]` the expected return. `policy` covers every non-terminal state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub r: Vec<f64>,
    pub gamma: f64,
    pub variant: ThresholdVariant,
    pub converged: bool,
    #[serde(rename = "iterations")]
    pub iterations_run: usize,
    /// Mean start-state usage per intervention; empty until
    /// [`Solution::attach_expected_usage`] is called.
    #[serde(default)]
    pub expected_usage: Vec<f64>,
    pub policy: BTreeMap<StateKey, ActionKind>,
    pub usage: BTreeMap<StateKey, Vec<f64>>,
    pub success: BTreeMap<StateKey, f64>,
    #[serde(default)]
    pub value: BTreeMap<StateKey, f64>,
}

impl Solution {
    pub fn interventions(&self) -> usize {
        self.r.len()
    }

    /// Mean over `starts` of `M_{s0}` for each intervention.
    pub fn expected_usage(&self, starts: &[StateKey]) -> Result<Vec<f64>> {
        let mut total = vec![0.0; self.interventions()];
        if starts.is_empty() {
            return Ok(total);
        }
        for s in starts {
            let m = self.usage.get(s).ok_or_else(|| Error::UnknownStart(s.clone()))?;
            for (t, v) in total.iter_mut().zip(m) {
                *t += v;
            }
        }
        let n = starts.len() as f64;
        Ok(total.into_iter().map(|t| t / n).collect())
    }

    pub fn attach_expected_usage(&mut self, starts: &[StateKey]) -> Result<()> {
        self.expected_usage = self.expected_usage(starts)?;
        Ok(())
    }

    /// Sum over interventions of `M_s`.
    pub fn total_usage(&self, state: &StateKey) -> Option<f64> {
        self.usage.get(state).map(|m| m.iter().sum())
    }

    pub fn action(&self, state: &StateKey) -> Option<ActionKind> {
        self.policy.get(state).copied()
    }

    /// `max_s |V_s - (S_s - sum_i r_i M_s^i)|`.
    pub fn decomposition_residual(&self) -> f64 {
        self.value
            .iter()
            .map(|(s, v)| {
                let m = &self.usage[s];
                let cost: f64 = self.r.iter().zip(m).map(|(r, m)| r * m).sum();
                (v - (self.success[s] - cost)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Mean `S_{s0}` over starts.
    pub fn expected_success(&self, starts: &[StateKey]) -> Result<f64> {
        if starts.is_empty() {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        for s in starts {
            sum += self.success.get(s).ok_or_else(|| Error::UnknownStart(s.clone()))?;
        }
        Ok(sum / starts.len() as f64)
    }
}

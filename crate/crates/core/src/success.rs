//! Per-branch success probabilities `p(s, a)`: the tabular stand-in for a
//! process reward model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::key::{ActionKind, Outcome, StateKey};
use crate::rollout::RolloutLog;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Empirical,
    Exact,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Empirical => "empirical",
            Provenance::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuccessEntry {
    pub p: f64,
    /// Number of samples behind `p`; 0 for exact entries.
    pub n: u64,
}

/// `p(s, a)`: probability that the trajectory through `s`, having taken
/// branch `a` there, ends in success.
///
/// Terminal keys are answered from their status (1 or 0) for every branch
/// and are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SuccessModel {
    entries: BTreeMap<(StateKey, ActionKind), SuccessEntry>,
    provenance: Provenance,
}

impl SuccessModel {
    pub fn new(provenance: Provenance) -> Self {
        SuccessModel {
            entries: BTreeMap::new(),
            provenance,
        }
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Inserts or replaces an entry. Terminal keys are ignored.
    pub fn insert(&mut self, state: StateKey, action: ActionKind, p: f64, n: u64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidSuccess {
                state,
                action,
                reason: format!("p = {p} outside [0, 1]"),
            });
        }
        if self.provenance == Provenance::Empirical && n == 0 {
            return Err(Error::InvalidSuccess {
                state,
                action,
                reason: "empirical entry without samples".into(),
            });
        }
        if state.is_terminal() {
            return Ok(());
        }
        self.entries.insert((state, action), SuccessEntry { p, n });
        Ok(())
    }

    /// Empirical estimate from complete rollouts.
    ///
    /// `p(s, a)` = successes / visits over every visit to `s` at which branch
    /// `a` was taken. Pairs never visited are absent.
    pub fn estimate(log: &RolloutLog) -> Result<Self> {
        let mut tally: BTreeMap<(StateKey, ActionKind), (u64, u64)> = BTreeMap::new();
        for ep in &log.episodes {
            let outcome = ep
                .outcome
                .filter(|_| ep.final_state.is_terminal())
                .ok_or_else(|| Error::MissingOutcome(ep.task_id.clone()))?;
            let won = u64::from(outcome == Outcome::Success);
            for step in &ep.steps {
                let t = tally.entry((step.state.clone(), step.branch())).or_default();
                t.0 += won;
                t.1 += 1;
            }
        }
        let mut model = SuccessModel::new(Provenance::Empirical);
        for ((s, a), (won, n)) in tally {
            model.insert(s, a, won as f64 / n as f64, n)?;
        }
        Ok(model)
    }

    /// `p(s, a)`; terminal keys give 1 or 0 regardless of `a`.
    pub fn get(&self, state: &StateKey, action: ActionKind) -> Option<f64> {
        match state.terminal() {
            Some(o) => Some(o.reward()),
            None => self.entries.get(&(state.clone(), action)).map(|e| e.p),
        }
    }

    pub fn entry(&self, state: &StateKey, action: ActionKind) -> Option<SuccessEntry> {
        match state.terminal() {
            Some(o) => Some(SuccessEntry { p: o.reward(), n: 0 }),
            None => self.entries.get(&(state.clone(), action)).copied(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateKey, ActionKind, SuccessEntry)> {
        self.entries.iter().map(|((s, a), e)| (s, *a, *e))
    }

    /// Sample-weighted mean of stored `p` (unweighted for exact models).
    pub fn mean(&self) -> Option<f64> {
        if self.entries.is_empty() {
            return None;
        }
        let (num, den) = self.entries.values().fold((0.0, 0.0), |(num, den), e| {
            let w = if self.provenance == Provenance::Exact { 1.0 } else { e.n as f64 };
            (num + w * e.p, den + w)
        });
        Some(num / den)
    }
}

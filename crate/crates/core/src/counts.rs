//! Transition counting (`count[s][a][s']++`).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::key::{ActionKind, StateKey};
use crate::rollout::RolloutLog;

/// Raw transition counts keyed by `(state, action) -> next -> count`.
///
/// Counts only ever grow. Tables built by parallel workers are combined
/// with [`CountTable::merge`], which is associative and commutative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountTable {
    rows: BTreeMap<(StateKey, ActionKind), BTreeMap<StateKey, u64>>,
    total: u64,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one observed transition.
    pub fn record(&mut self, state: &StateKey, action: ActionKind, next: &StateKey) -> Result<()> {
        self.record_n(state, action, next, 1)
    }

    pub fn record_n(
        &mut self,
        state: &StateKey,
        action: ActionKind,
        next: &StateKey,
        n: u64,
    ) -> Result<()> {
        if state.is_terminal() {
            return Err(Error::TerminalSource(state.clone()));
        }
        if n == 0 {
            return Ok(());
        }
        *self
            .rows
            .entry((state.clone(), action))
            .or_default()
            .entry(next.clone())
            .or_insert(0) += n;
        self.total += n;
        Ok(())
    }

    /// Counts every transition of every episode in the log.
    pub fn from_log(log: &RolloutLog) -> Result<Self> {
        let mut table = CountTable::new();
        for (s, a, s2) in log.transitions() {
            table.record(s, a, s2)?;
        }
        Ok(table)
    }

    pub fn merge(&mut self, other: CountTable) {
        for (row, nexts) in other.rows {
            let dst = self.rows.entry(row).or_default();
            for (next, n) in nexts {
                *dst.entry(next).or_insert(0) += n;
            }
        }
        self.total += other.total;
    }

    pub fn count(&self, state: &StateKey, action: ActionKind, next: &StateKey) -> u64 {
        self.rows
            .get(&(state.clone(), action))
            .and_then(|r| r.get(next))
            .copied()
            .unwrap_or(0)
    }

    /// Number of recorded transitions.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Observed `(state, action)` rows in key order.
    pub fn rows(&self) -> impl Iterator<Item = (&StateKey, ActionKind, &BTreeMap<StateKey, u64>)> {
        self.rows.iter().map(|((s, a), r)| (s, *a, r))
    }

    /// Flat `(state, action, next, count)` entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&StateKey, ActionKind, &StateKey, u64)> {
        self.rows()
            .flat_map(|(s, a, r)| r.iter().map(move |(s2, n)| (s, a, s2, *n)))
    }

    /// Keeps only rows whose source state satisfies `keep`.
    pub fn retain_sources(&mut self, mut keep: impl FnMut(&StateKey) -> bool) {
        self.rows.retain(|(s, _), _| keep(s));
        self.total = self.rows.values().flat_map(|r| r.values()).sum();
    }
}

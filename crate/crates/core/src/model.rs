//! Categorical next-state laws estimated from counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::key::{ActionKind, StateKey};

/// Tolerance on row sums for externally supplied distributions.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// One `(state, action)` distribution with successors stored as state indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub action: ActionKind,
    /// `(next state index, probability)`, sorted by index, probabilities > 0.
    pub next: Vec<(usize, f64)>,
}

impl Row {
    /// `sum_{s'} P(s') * values[s']`.
    #[inline]
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.next.iter().map(|&(j, p)| p * values[j]).sum()
    }
}

/// `P(s' | s, a)` for every observed `(s, a)`.
///
/// States are indexed in key order; the support contains every source and
/// every successor. Rows that were never observed are absent rather than
/// filled in, and consumers decide how to treat them.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionModel {
    states: Vec<StateKey>,
    index: HashMap<StateKey, usize>,
    rows: Vec<Vec<Row>>,
}

impl TransitionModel {
    /// `P(s'|s,a) = count[s][a][s'] / sum_x count[s][a][x]`.
    pub fn normalize(table: &CountTable) -> Result<Self> {
        Self::normalize_smoothed(table, 0.0)
    }

    /// Normalizes counts with additive smoothing `alpha` applied over each
    /// row's observed successors. `alpha = 0` is the plain estimate; smoothing
    /// never adds successors that were not observed.
    pub fn normalize_smoothed(table: &CountTable, alpha: f64) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::NoData);
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("smoothing alpha must be >= 0, got {alpha}")));
        }
        let rows = table.rows().map(|(s, a, nexts)| {
            let total: f64 = nexts.values().map(|&n| n as f64 + alpha).sum();
            let dist = nexts
                .iter()
                .map(|(s2, &n)| (s2.clone(), (n as f64 + alpha) / total))
                .collect::<Vec<_>>();
            (s.clone(), a, dist)
        });
        Self::from_rows(rows)
    }

    /// Builds a model from explicit distributions.
    ///
    /// Each row must have probabilities in `[0, 1]` summing to 1 within
    /// [`ROW_SUM_TOL`]; repeated successors are summed, zero entries dropped.
    pub fn from_rows<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (StateKey, ActionKind, Vec<(StateKey, f64)>)>,
    {
        Self::from_rows_with_states(rows, std::iter::empty())
    }

    /// Like [`from_rows`](Self::from_rows), additionally placing `extra`
    /// states in the support even if no row mentions them.
    pub fn from_rows_with_states<I, E>(rows: I, extra: E) -> Result<Self>
    where
        I: IntoIterator<Item = (StateKey, ActionKind, Vec<(StateKey, f64)>)>,
        E: IntoIterator<Item = StateKey>,
    {
        let mut by_row: BTreeMap<(StateKey, ActionKind), BTreeMap<StateKey, f64>> = BTreeMap::new();
        let mut support: BTreeSet<StateKey> = extra.into_iter().collect();
        for (s, a, dist) in rows {
            if s.is_terminal() {
                return Err(Error::TerminalSource(s));
            }
            if by_row.contains_key(&(s.clone(), a)) {
                return Err(Error::InvalidRow {
                    state: s,
                    action: a,
                    reason: "duplicate row".into(),
                });
            }
            let mut merged: BTreeMap<StateKey, f64> = BTreeMap::new();
            let mut sum = 0.0;
            for (s2, p) in dist {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidRow {
                        state: s,
                        action: a,
                        reason: format!("probability {p} outside [0, 1]"),
                    });
                }
                sum += p;
                if p > 0.0 {
                    *merged.entry(s2).or_insert(0.0) += p;
                }
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidRow {
                    state: s,
                    action: a,
                    reason: format!("probabilities sum to {sum}"),
                });
            }
            support.insert(s.clone());
            support.extend(merged.keys().cloned());
            by_row.insert((s, a), merged);
        }
        let states: Vec<StateKey> = support.into_iter().collect();
        let index: HashMap<StateKey, usize> =
            states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut out_rows: Vec<Vec<Row>> = vec![Vec::new(); states.len()];
        for ((s, a), dist) in by_row {
            let next = dist.into_iter().map(|(s2, p)| (index[&s2], p)).collect();
            out_rows[index[&s]].push(Row { action: a, next });
        }
        Ok(TransitionModel {
            states,
            index,
            rows: out_rows,
        })
    }

    /// All states in key order.
    pub fn states(&self) -> &[StateKey] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, key: &StateKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn contains(&self, key: &StateKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn key(&self, i: usize) -> &StateKey {
        &self.states[i]
    }

    /// Rows out of state `i`, sorted by action.
    pub fn rows(&self, i: usize) -> &[Row] {
        &self.rows[i]
    }

    pub fn row(&self, i: usize, action: ActionKind) -> Option<&Row> {
        self.rows[i].iter().find(|r| r.action == action)
    }

    pub fn has_row(&self, key: &StateKey, action: ActionKind) -> bool {
        self.index_of(key).is_some_and(|i| self.row(i, action).is_some())
    }

    /// `P(next | state, action)`; 0 for unknown rows or successors.
    pub fn prob(&self, state: &StateKey, action: ActionKind, next: &StateKey) -> f64 {
        let (Some(i), Some(j)) = (self.index_of(state), self.index_of(next)) else {
            return 0.0;
        };
        self.row(i, action)
            .and_then(|r| r.next.iter().find(|(k, _)| *k == j))
            .map_or(0.0, |&(_, p)| p)
    }

    /// Distribution of `(state, action)` with keys, if observed.
    pub fn distribution(&self, state: &StateKey, action: ActionKind) -> Option<Vec<(&StateKey, f64)>> {
        let i = self.index_of(state)?;
        let row = self.row(i, action)?;
        Some(row.next.iter().map(|&(j, p)| (&self.states[j], p)).collect())
    }

    /// Highest intervention index appearing in any row.
    pub fn interventions(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .filter_map(|r| r.action.intervention())
            .max()
            .unwrap_or(0)
    }

    /// Number of `(state, action)` rows.
    pub fn row_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `(state, action, next, p)` in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&StateKey, ActionKind, &StateKey, f64)> {
        self.rows.iter().enumerate().flat_map(move |(i, rows)| {
            rows.iter().flat_map(move |r| {
                r.next
                    .iter()
                    .map(move |&(j, p)| (&self.states[i], r.action, &self.states[j], p))
            })
        })
    }
}

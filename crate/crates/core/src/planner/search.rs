use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::key::StateKey;
use crate::model::TransitionModel;
use crate::planner::config::RewardConfig;
use crate::planner::{solve, Solution};
use crate::success::SuccessModel;

/// Bisection controls for finding the cheapest reward that meets a usage
/// budget.
///
/// The search runs over a scalar `t`; intervention `i` costs `t * weights[i]`.
/// With one intervention and the default weight, `t` is the cost itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Budget on the mean start-state usage summed over interventions.
    pub budget: f64,
    pub lo: f64,
    pub hi: f64,
    /// Stop once the usage at the upper end is this close to the budget.
    pub usage_tol: f64,
    /// Stop once the bracket is narrower than this.
    pub r_tol: f64,
    pub max_steps: usize,
    /// Per-intervention cost weights; `None` means all ones.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl SearchConfig {
    pub fn new(budget: f64) -> Self {
        SearchConfig {
            budget,
            lo: 0.0,
            hi: 1.0,
            usage_tol: 1e-3,
            r_tol: 1e-6,
            max_steps: 60,
            weights: None,
        }
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    fn validate(&self, k: usize) -> Result<()> {
        if !(self.budget.is_finite() && self.budget >= 0.0) {
            return Err(Error::InvalidConfig(format!("budget must be finite and >= 0, got {}", self.budget)));
        }
        if !(self.lo >= 0.0 && self.lo <= self.hi && self.hi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "search bounds must satisfy 0 <= lo <= hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if let Some(w) = &self.weights {
            if w.len() != k || w.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::InvalidConfig(format!(
                    "expected {k} non-negative weight(s), got {w:?}"
                )));
            }
        }
        Ok(())
    }
}

/// One solver call made during the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub r: f64,
    pub expected_usage: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Smallest probed multiplier whose usage met the budget.
    pub r: f64,
    pub solution: Solution,
    pub trace: Vec<Probe>,
    /// Final `(infeasible, feasible)` bracket; equal ends when `lo` was
    /// already feasible.
    pub bracket: (f64, f64),
}

/// Finds the smallest cost multiplier whose solution keeps the mean
/// start-state usage within `search.budget`.
///
/// Solves at `lo` first and returns it if it already fits, then at `hi`,
/// failing with [`Error::BudgetInfeasible`] if even that exceeds the budget.
/// Otherwise bisects, keeping the smallest feasible probe.
pub fn reward_search(
    model: &TransitionModel,
    success: &SuccessModel,
    base: &RewardConfig,
    starts: &[StateKey],
    search: &SearchConfig,
) -> Result<SearchResult> {
    let k = base.interventions();
    search.validate(k)?;
    let weights = search.weights.clone().unwrap_or_else(|| vec![1.0; k]);
    let mut trace = Vec::new();
    let mut probe = |t: f64| -> Result<(Solution, bool)> {
        let cfg = base.clone().with_r(weights.iter().map(|w| w * t).collect());
        let mut sol = solve(model, success, &cfg)?;
        sol.attach_expected_usage(starts)?;
        let usage: f64 = sol.expected_usage.iter().sum();
        let feasible = usage <= search.budget;
        trace.push(Probe {
            r: t,
            expected_usage: usage,
            feasible,
        });
        Ok((sol, feasible))
    };

    let (sol_lo, ok) = probe(search.lo)?;
    if ok {
        return Ok(SearchResult {
            r: search.lo,
            solution: sol_lo,
            trace,
            bracket: (search.lo, search.lo),
        });
    }
    let (sol_hi, ok) = probe(search.hi)?;
    if !ok {
        return Err(Error::BudgetInfeasible {
            r_hi: search.hi,
            usage: trace.last().map_or(f64::NAN, |p| p.expected_usage),
            budget: search.budget,
        });
    }

    let (mut lo, mut hi) = (search.lo, search.hi);
    let mut best = sol_hi;
    let mut best_usage: f64 = best.expected_usage.iter().sum();
    for _ in 0..search.max_steps {
        if (search.budget - best_usage).abs() <= search.usage_tol || hi - lo <= search.r_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (sol, ok) = probe(mid)?;
        if ok {
            hi = mid;
            best_usage = sol.expected_usage.iter().sum();
            best = sol;
        } else {
            lo = mid;
        }
    }
    Ok(SearchResult {
        r: hi,
        solution: best,
        trace,
        bracket: (lo, hi),
    })
}

//! Tabular models and offline dynamic programming for deciding, state by
//! state, when an agent should call for an intervention under a usage budget.
//!
//! The flow is: record transitions into a [`CountTable`], normalize it into a
//! [`TransitionModel`], estimate per-branch success in a [`SuccessModel`],
//! then solve with [`planner::solve`] or search the cost that meets a budget
//! with [`planner::reward_search`]. The [`oracle`] module checks all of it
//! with independent methods.

pub mod counts;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod key;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod rollout;
pub mod success;

pub use counts::CountTable;
pub use error::{Error, Result};
pub use key::{ActionKind, Outcome, StateKey};
pub use model::TransitionModel;
pub use rollout::{Episode, RolloutLog, Step};
pub use success::{Provenance, SuccessModel};

//! Independent verification engines: exact linear policy evaluation,
//! exhaustive policy enumeration, seeded Monte Carlo and random test MDPs.
//!
//! Nothing here shares code with the iterative solvers in
//! [`planner`](crate::planner) beyond the model types.

mod continuation;
mod enumerate;
mod monte_carlo;
mod policy_eval;
mod random_mdp;

pub use continuation::continuation_success;
pub use enumerate::{brute_force_optimal, EnumerationReport, DEFAULT_ENUMERATION_CAP};
pub use monte_carlo::{monte_carlo_estimate, simulate_policy, McEstimate, McSample};
pub use policy_eval::{exact_policy_eval, PolicyEvaluation};
pub use random_mdp::{random_mdp, RandomMdpSpec};

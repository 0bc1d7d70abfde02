//! Exit status categories.

use helpdp_core::Error as CoreError;
use helpdp_sim::SimError;

/// Bad flags, bad config, missing inputs.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const USAGE: i32 = 2;
pub const PLANNER: i32 = 3;
pub const DATA: i32 = 4;
pub const OTHER: i32 = 1;

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::InvalidConfig(_) | CoreError::Parse(_) => USAGE,
        CoreError::BudgetInfeasible { .. }
        | CoreError::NotConverged
        | CoreError::ImproperChain { .. }
        | CoreError::MissingRow { .. }
        | CoreError::MissingSuccess { .. }
        | CoreError::UnknownStart(_)
        | CoreError::SingularSystem
        | CoreError::EnumerationTooLarge { .. }
        | CoreError::PolicyUndefined(_) => PLANNER,
        CoreError::TerminalSource(_)
        | CoreError::NoData
        | CoreError::MissingOutcome(_)
        | CoreError::InvalidRow { .. }
        | CoreError::InvalidSuccess { .. }
        | CoreError::Json { .. }
        | CoreError::Io(_) => DATA,
    }
}

fn sim_code(e: &SimError) -> i32 {
    match e {
        SimError::Config(_) | SimError::UnknownIntervention { .. } => USAGE,
        SimError::EmptyTaskset | SimError::EmptyValidation | SimError::SingleClass => DATA,
        SimError::Core(c) => core_code(c),
        SimError::IllegalAction { .. } | SimError::Terminal(_) | SimError::NoCandidates => OTHER,
    }
}

/// Status for an error, from the first categorized cause in its chain.
pub fn code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return USAGE;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core_code(e);
        }
        if let Some(e) = cause.downcast_ref::<SimError>() {
            return sim_code(e);
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return DATA;
        }
    }
    OTHER
}

use crate::key::{ActionKind, StateKey};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("terminal source: transitions out of `{0}` cannot be recorded")]
    TerminalSource(StateKey),

    #[error("no data")]
    NoData,

    #[error("rollout `{0}` has no terminal outcome")]
    MissingOutcome(String),

    #[error("invalid distribution for ({state}, {action}): {reason}")]
    InvalidRow {
        state: StateKey,
        action: ActionKind,
        reason: String,
    },

    #[error("invalid success probability for ({state}, {action}): {reason}")]
    InvalidSuccess {
        state: StateKey,
        action: ActionKind,
        reason: String,
    },

    #[error("missing `{action}` row for non-terminal state `{state}`")]
    MissingRow { state: StateKey, action: ActionKind },

    #[error("missing success estimate for ({state}, {action})")]
    MissingSuccess { state: StateKey, action: ActionKind },

    #[error("improper chain: with gamma = 1, {count} state(s) can avoid termination forever (first: `{first}`)")]
    ImproperChain { count: usize, first: StateKey },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown start state `{0}`")]
    UnknownStart(StateKey),

    #[error("budget infeasible within bounds: E[U] = {usage} at r_hi = {r_hi} exceeds budget {budget}")]
    BudgetInfeasible { r_hi: f64, usage: f64, budget: f64 },

    #[error("solution has not converged")]
    NotConverged,

    #[error("enumeration too large: {count} non-terminal states exceeds cap {cap}")]
    EnumerationTooLarge { count: usize, cap: usize },

    #[error("policy is not defined at non-terminal state `{0}`")]
    PolicyUndefined(StateKey),

    #[error("singular policy-evaluation system (gamma = 1 with a non-absorbing policy?)")]
    SingularSystem,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

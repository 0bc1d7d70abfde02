use helpdp_core::StateKey;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid environment config: {0}")]
    Config(String),

    #[error("illegal action `{action}` in `{state}`")]
    IllegalAction { action: String, state: StateKey },

    #[error("state `{0}` is terminal")]
    Terminal(StateKey),

    #[error("no legal candidates")]
    NoCandidates,

    #[error("empty taskset")]
    EmptyTaskset,

    #[error("empty validation split")]
    EmptyValidation,

    #[error("validation set has a single outcome class")]
    SingleClass,

    #[error("unknown intervention index {index} (have {available})")]
    UnknownIntervention { index: usize, available: usize },

    #[error(transparent)]
    Core(#[from] helpdp_core::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

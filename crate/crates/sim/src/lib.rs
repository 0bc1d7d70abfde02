//! A small object-search environment standing in for an embodied benchmark,
//! its actors and intervention sources, and the collect / plan / deploy /
//! evaluate pipeline built on `helpdp-core`.

pub mod actors;
pub mod env;
pub mod episode;
pub mod error;
pub mod exact;
pub mod mcts;
pub mod pipeline;

pub use actors::Intervention;
pub use env::{generate_tasks, Action, EnvConfig, EnvState, Task, TaskSet};
pub use episode::{Controller, Env, TaskRunner};
pub use error::{Result, SimError};

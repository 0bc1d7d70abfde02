//! Phase-1 collection, helper construction, deployment-time evaluation,
//! seen/unseen splits and the baselines.

mod baselines;
mod collect;
mod evaluate;
mod helper;
mod selfreg;

pub use baselines::{
    calibrate_threshold, percentile_threshold, statewise_policy, task_scores, visited_difficulties, TaskwiseVariant,
    Threshold,
};
pub use collect::{collect_phase1, default_schedule, truncate_coverage, SWEEP_PROBABILITIES};
pub use evaluate::{evaluate, planner_expectation, Behavior, EpisodeResult, Metrics};
pub use helper::{build_helper, expand_policy, split_seen_unseen, Expansion, HelperMode, HelperPolicy, ThresholdFallback};
pub use selfreg::{self_regulation_eval, trajectory_score, Labeled, SelfRegReport};

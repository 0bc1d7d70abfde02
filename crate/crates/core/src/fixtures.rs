//! Small hand-checkable MDPs used by tests, the oracle command and the
//! acceptance suite.
//!
//! * `mdp_a`: one decision state; nohelp succeeds w.p. 0.2, help w.p. 0.9.
//! * `mdp_b`: `s0 -> s1` chain; at `s1` nohelp succeeds w.p. 0.1 and help
//!   w.p. 0.8; at `s0` help succeeds outright half the time.
//! * `corridor`: three states where helping at the entrance only moves the
//!   agent into a region where the base actor tends to walk back.

use crate::key::{ActionKind, Outcome, StateKey};
use crate::model::TransitionModel;
use crate::oracle::continuation_success;
use crate::success::SuccessModel;

pub fn s(id: &str) -> StateKey {
    StateKey::named(id)
}

pub fn success() -> StateKey {
    StateKey::terminal_named("goal", Outcome::Success)
}

pub fn failure() -> StateKey {
    StateKey::terminal_named("fail", Outcome::Failure)
}

type RowSpec = (StateKey, ActionKind, Vec<(StateKey, f64)>);

fn build(rows: Vec<RowSpec>) -> TransitionModel {
    TransitionModel::from_rows_with_states(rows, [success(), failure()]).expect("fixture rows are valid")
}

const NOHELP: ActionKind = ActionKind::NoHelp;

fn help(i: usize) -> ActionKind {
    ActionKind::help(i)
}

pub fn mdp_a() -> TransitionModel {
    build(vec![
        (s("s0"), NOHELP, vec![(success(), 0.2), (failure(), 0.8)]),
        (s("s0"), help(1), vec![(success(), 0.9), (failure(), 0.1)]),
    ])
}

/// `mdp_a` with a second intervention whose dynamics equal nohelp.
pub fn mdp_a_dominated() -> TransitionModel {
    build(vec![
        (s("s0"), NOHELP, vec![(success(), 0.2), (failure(), 0.8)]),
        (s("s0"), help(1), vec![(success(), 0.9), (failure(), 0.1)]),
        (s("s0"), help(2), vec![(success(), 0.2), (failure(), 0.8)]),
    ])
}

pub fn mdp_b() -> TransitionModel {
    build(vec![
        (s("s0"), NOHELP, vec![(s("s1"), 1.0)]),
        (s("s0"), help(1), vec![(success(), 0.5), (s("s1"), 0.5)]),
        (s("s1"), NOHELP, vec![(success(), 0.1), (failure(), 0.9)]),
        (s("s1"), help(1), vec![(success(), 0.8), (failure(), 0.2)]),
    ])
}

/// `s0 -> s1 -> s2 -> goal`. The base actor at `s1` drifts back to `s0`
/// most of the time, so help at `s0` alone barely pays off.
pub fn corridor() -> TransitionModel {
    build(vec![
        (s("s0"), NOHELP, vec![(s("s1"), 0.5), (failure(), 0.5)]),
        (s("s0"), help(1), vec![(s("s1"), 1.0)]),
        (s("s1"), NOHELP, vec![(s("s0"), 0.6), (s("s2"), 0.2), (failure(), 0.2)]),
        (s("s1"), help(1), vec![(s("s2"), 0.9), (s("s0"), 0.1)]),
        (s("s2"), NOHELP, vec![(success(), 0.9), (failure(), 0.1)]),
        (s("s2"), help(1), vec![(success(), 1.0)]),
    ])
}

/// Exact success model of a fixture: take the branch, then follow nohelp.
pub fn exact_success(model: &TransitionModel) -> SuccessModel {
    continuation_success(model).expect("fixture success model")
}

/// Every fixture by name.
pub fn by_name(name: &str) -> Option<TransitionModel> {
    match name {
        "mdp_a" => Some(mdp_a()),
        "mdp_a_dominated" => Some(mdp_a_dominated()),
        "mdp_b" => Some(mdp_b()),
        "corridor" => Some(corridor()),
        _ => None,
    }
}

pub const NAMES: [&str; 4] = ["mdp_a", "mdp_a_dominated", "mdp_b", "corridor"];

pub fn start() -> StateKey {
    s("s0")
}


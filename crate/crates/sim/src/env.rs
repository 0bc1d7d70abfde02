//! Ring of rooms with an object to find. The hint names a few rooms, one of
//! which holds the object; the object may be moved once mid-episode.

use std::fmt;

use helpdp_core::{Outcome, StateKey};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Environment and actor parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub room_count: usize,
    pub max_steps: usize,
    /// Relative weight of hint sizes 1, 2, ...
    pub hint_size_weights: Vec<f64>,
    /// Probability that a task moves its object once.
    pub move_prob: f64,
    /// Inclusive range of steps at which a move may happen.
    pub move_window: (usize, usize),
    /// Base actor noise.
    pub eta: f64,
    /// Strong actor noise.
    pub eta_strong: f64,
    pub mcts: MctsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MctsConfig {
    /// Candidates proposed per decision.
    pub k: usize,
    /// Exploration constant.
    pub c: f64,
    /// Half-width of the deterministic perturbation added to exact scores.
    pub q_noise: f64,
    /// Base actor temperature used to propose candidates.
    pub temperature: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            k: 5,
            c: 0.25,
            q_noise: 0.1,
            temperature: 1.0,
        }
    }
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            room_count: 6,
            max_steps: 12,
            hint_size_weights: vec![0.5, 0.25, 0.25],
            move_prob: 1.0,
            move_window: (1, 2),
            eta: 0.35,
            eta_strong: 0.05,
            mcts: MctsConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::Config(m));
        if !(2..=16).contains(&self.room_count) {
            return bad(format!("room_count must be in 2..=16, got {}", self.room_count));
        }
        if !(1..=250).contains(&self.max_steps) {
            return bad(format!("max_steps must be in 1..=250, got {}", self.max_steps));
        }
        if self.hint_size_weights.is_empty() || self.hint_size_weights.iter().all(|w| *w <= 0.0) {
            return bad("hint_size_weights needs a positive entry".into());
        }
        if self.hint_size_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("hint_size_weights must be finite and >= 0".into());
        }
        let largest = self.hint_size_weights.iter().rposition(|w| *w > 0.0).unwrap() + 1;
        if largest > self.room_count {
            return bad(format!("hint size {largest} exceeds room_count {}", self.room_count));
        }
        for (name, p) in [("move_prob", self.move_prob), ("eta", self.eta), ("eta_strong", self.eta_strong)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.move_window.0 > self.move_window.1 {
            return bad(format!("empty move_window {:?}", self.move_window));
        }
        if self.mcts.k == 0 {
            return bad("mcts.k must be positive".into());
        }
        if !(self.mcts.c >= 0.0 && self.mcts.q_noise >= 0.0 && (0.0..=1.0).contains(&self.mcts.temperature)) {
            return bad("mcts: c and q_noise must be >= 0, temperature in [0, 1]".into());
        }
        Ok(())
    }
}

/// Number of tasks per split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        SplitSizes {
            train: 1000,
            val: 40,
            test: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    /// The object is in `room` from this step on.
    pub step: usize,
    pub room: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub task_id: String,
    pub room_count: usize,
    /// Object room at the start.
    pub object_location: usize,
    /// Sorted rooms, one of which is `object_location`.
    pub hint: Vec<usize>,
    pub move_schedule: Vec<Move>,
    pub max_steps: usize,
    pub optimal_length: usize,
}

impl Task {
    /// Builds a task and computes its optimal length. The agent starts in room 0.
    pub fn new(
        task_id: impl Into<String>,
        room_count: usize,
        object_location: usize,
        mut hint: Vec<usize>,
        mut move_schedule: Vec<Move>,
        max_steps: usize,
    ) -> Result<Task> {
        hint.sort_unstable();
        hint.dedup();
        move_schedule.sort_by_key(|m| m.step);
        if room_count < 2 || hint.iter().chain([&object_location]).any(|&r| r >= room_count) {
            return Err(SimError::Config("room index out of range".into()));
        }
        if !hint.contains(&object_location) {
            return Err(SimError::Config("hint must contain the object room".into()));
        }
        if move_schedule.iter().any(|m| m.room >= room_count) {
            return Err(SimError::Config("move target out of range".into()));
        }
        let mut task = Task {
            task_id: task_id.into(),
            room_count,
            object_location,
            hint,
            move_schedule,
            max_steps,
            optimal_length: 0,
        };
        task.optimal_length = task
            .shortest_success()
            .ok_or_else(|| SimError::Config(format!("task `{}` cannot be solved in time", task.task_id)))?;
        Ok(task)
    }

    /// Object room at step `t`.
    pub fn object_at(&self, t: usize) -> usize {
        self.move_schedule
            .iter()
            .rev()
            .find(|m| m.step <= t)
            .map_or(self.object_location, |m| m.room)
    }

    pub fn moved_by(&self, t: usize) -> bool {
        self.move_schedule.iter().any(|m| m.step <= t)
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        let d = (a + self.room_count - b) % self.room_count;
        d.min(self.room_count - d)
    }

    /// Fewest steps to a successful explore: the agent can wait by exploring,
    /// so step `t` works iff the object room at `t` is within `t` moves.
    fn shortest_success(&self) -> Option<usize> {
        (0..self.max_steps)
            .find(|&t| self.distance(0, self.object_at(t)) <= t)
            .map(|t| t + 1)
    }

    /// Key fields describing the task itself.
    fn context_fields(&self) -> [(&'static str, String); 5] {
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(".");
        let moves = if self.move_schedule.is_empty() {
            "none".to_owned()
        } else {
            join(&mut self.move_schedule.iter().map(|m| format!("{}@{}", m.room, m.step)))
        };
        [
            ("hint", join(&mut self.hint.iter().map(|r| r.to_string()))),
            ("moves", moves),
            ("n", self.room_count.to_string()),
            ("obj", self.object_location.to_string()),
            ("T", self.max_steps.to_string()),
        ]
    }

    /// Identity of the task's dynamics; tasks with equal context share states.
    pub fn context(&self) -> String {
        self.context_fields()
            .iter()
            .map(|(n, v)| format!("{n}:{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn start(&self) -> EnvState {
        EnvState {
            elapsed: 0,
            room: 0,
            explored: 0,
            status: None,
        }
    }

    /// Canonical key of `state` within this task.
    pub fn key(&self, state: &EnvState) -> StateKey {
        let explored: Vec<String> = (0..self.room_count)
            .filter(|r| state.explored & (1 << r) != 0)
            .map(|r| r.to_string())
            .collect();
        let mut fields: Vec<(&str, String)> = self.context_fields().into();
        fields.extend([
            ("t", state.elapsed.to_string()),
            ("room", state.room.to_string()),
            ("explored", if explored.is_empty() { "none".into() } else { explored.join(".") }),
            ("moved", u8::from(self.moved_by(state.elapsed)).to_string()),
        ]);
        if let Some(o) = state.status {
            fields.push(("status", o.as_str().to_owned()));
        }
        StateKey::from_fields(fields)
    }

    pub fn legal_actions(&self, state: &EnvState) -> Vec<Action> {
        let n = self.room_count;
        let cw = (state.room + 1) % n;
        let ccw = (state.room + n - 1) % n;
        let mut actions = vec![Action::Go(cw)];
        if ccw != cw {
            actions.push(Action::Go(ccw));
        }
        actions.push(Action::Explore);
        actions
    }

    /// Deterministic transition. Exploring the object's current room
    /// succeeds; running out of steps fails.
    pub fn step(&self, state: &EnvState, action: Action) -> Result<EnvState> {
        if state.is_terminal() {
            return Err(SimError::Terminal(self.key(state)));
        }
        if !self.legal_actions(state).contains(&action) {
            return Err(SimError::IllegalAction {
                action: action.to_string(),
                state: self.key(state),
            });
        }
        let mut next = *state;
        match action {
            Action::Explore => {
                if state.room == self.object_at(state.elapsed) {
                    next.status = Some(Outcome::Success);
                }
                next.explored |= 1 << state.room;
            }
            Action::Go(r) => next.room = r,
        }
        next.elapsed += 1;
        if next.status.is_none() && next.elapsed >= self.max_steps {
            next.status = Some(Outcome::Failure);
        }
        Ok(next)
    }
}

/// Agent situation within a task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnvState {
    pub elapsed: usize,
    pub room: usize,
    /// Bit `r` set once room `r` has been explored.
    pub explored: u32,
    pub status: Option<Outcome>,
}

impl EnvState {
    pub fn is_terminal(&self) -> bool {
        self.status.is_some()
    }

    pub fn found(&self) -> bool {
        self.status == Some(Outcome::Success)
    }

    pub fn explored(&self, room: usize) -> bool {
        self.explored & (1 << room) != 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Go(usize),
    Explore,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Go(r) => write!(f, "go:{r}"),
            Action::Explore => f.write_str("explore"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSet {
    pub train: Vec<Task>,
    pub val: Vec<Task>,
    pub test: Vec<Task>,
}

impl TaskSet {
    pub fn split(&self, name: &str) -> Option<&[Task]> {
        match name {
            "train" => Some(&self.train),
            "val" => Some(&self.val),
            "test" => Some(&self.test),
            _ => None,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &Task> {
        self.train.iter().chain(&self.val).chain(&self.test)
    }
}

/// Draws the three splits. Each split has its own random stream, so resizing
/// one split leaves the others unchanged.
pub fn generate_tasks(cfg: &EnvConfig, sizes: &SplitSizes, seed: u64) -> Result<TaskSet> {
    cfg.validate()?;
    let mut out = TaskSet::default();
    for (stream, (name, count, dest)) in [
        ("train", sizes.train, &mut out.train),
        ("val", sizes.val, &mut out.val),
        ("test", sizes.test, &mut out.test),
    ]
    .into_iter()
    .enumerate()
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        for i in 0..count {
            dest.push(draw_task(cfg, format!("{name}-{i:04}"), &mut rng)?);
        }
    }
    Ok(out)
}

fn draw_task(cfg: &EnvConfig, id: String, rng: &mut ChaCha8Rng) -> Result<Task> {
    let n = cfg.room_count;
    let total: f64 = cfg.hint_size_weights.iter().sum();
    for _ in 0..1000 {
        let mut u = rng.gen::<f64>() * total;
        let mut size = cfg.hint_size_weights.len();
        for (i, w) in cfg.hint_size_weights.iter().enumerate() {
            if u < *w {
                size = i + 1;
                break;
            }
            u -= w;
        }
        let object = rng.gen_range(0..n);
        let others: Vec<usize> = (0..n).filter(|&r| r != object).collect();
        let mut hint: Vec<usize> = others.choose_multiple(rng, size - 1).copied().collect();
        hint.push(object);
        let mut moves = Vec::new();
        if rng.gen::<f64>() < cfg.move_prob {
            let step = rng.gen_range(cfg.move_window.0..=cfg.move_window.1);
            let room = *others.choose(rng).expect("at least two rooms");
            moves.push(Move { step, room });
        }
        match Task::new(id.clone(), n, object, hint, moves, cfg.max_steps) {
            Ok(t) => return Ok(t),
            Err(SimError::Config(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(SimError::Config(format!("could not draw a solvable task within {} steps", cfg.max_steps)))
}

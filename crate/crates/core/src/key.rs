//! Canonical state identity and the action branches available to a helper.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Field that marks a key as terminal.
pub const STATUS_FIELD: &str = "status";

const FIELD_SEP: char = ';';
const KV_SEP: char = '=';

/// How an episode ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
        }
    }

    /// Terminal reward: 1 for success, 0 for failure.
    pub fn reward(self) -> f64 {
        match self {
            Outcome::Success => 1.0,
            Outcome::Failure => 0.0,
        }
    }
}

/// Canonical text serialization of an environment state.
///
/// Keys built with [`StateKey::from_fields`] have the form
/// `name=value;name=value` with fields sorted by name, so the same state
/// always produces the same bytes. A key is terminal iff one of its fields is
/// `status=success` or `status=failure`; the flag is derived from the text,
/// which keeps equality, ordering and hashing purely textual.
#[derive(Clone)]
pub struct StateKey {
    text: Arc<str>,
    terminal: Option<Outcome>,
}

impl StateKey {
    /// Wraps an already-canonical key string.
    pub fn parse(text: impl AsRef<str>) -> Self {
        let text = text.as_ref();
        let terminal = text.split(FIELD_SEP).find_map(|field| {
            let (name, value) = field.split_once(KV_SEP)?;
            if name != STATUS_FIELD {
                return None;
            }
            match value {
                "success" => Some(Outcome::Success),
                "failure" => Some(Outcome::Failure),
                _ => None,
            }
        });
        StateKey {
            text: Arc::from(text),
            terminal,
        }
    }

    /// Builds a canonical key from named fields. Field order is irrelevant.
    ///
    /// Panics if a name is repeated or a name/value contains `;` or `=`.
    pub fn from_fields<N, V, I>(fields: I) -> Self
    where
        N: AsRef<str>,
        V: AsRef<str>,
        I: IntoIterator<Item = (N, V)>,
    {
        let mut pairs: Vec<(String, String)> = fields
            .into_iter()
            .map(|(n, v)| (n.as_ref().to_owned(), v.as_ref().to_owned()))
            .collect();
        pairs.sort();
        for w in pairs.windows(2) {
            assert!(w[0].0 != w[1].0, "duplicate key field `{}`", w[0].0);
        }
        let mut text = String::new();
        for (i, (name, value)) in pairs.iter().enumerate() {
            assert!(
                !name.contains([FIELD_SEP, KV_SEP]) && !value.contains([FIELD_SEP, KV_SEP]),
                "key field `{name}={value}` contains a separator"
            );
            if i > 0 {
                text.push(FIELD_SEP);
            }
            text.push_str(name);
            text.push(KV_SEP);
            text.push_str(value);
        }
        StateKey::parse(text)
    }

    /// Non-terminal key with a single `id` field.
    pub fn named(id: &str) -> Self {
        StateKey::from_fields([("id", id)])
    }

    /// Terminal key with an `id` field and the matching status.
    pub fn terminal_named(id: &str, outcome: Outcome) -> Self {
        StateKey::from_fields([("id", id), (STATUS_FIELD, outcome.as_str())])
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn terminal(&self) -> Option<Outcome> {
        self.terminal
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    /// Value of a named field, if the key is in field form.
    pub fn field(&self, name: &str) -> Option<&str> {
        self.text.split(FIELD_SEP).find_map(|f| {
            let (n, v) = f.split_once(KV_SEP)?;
            (n == name).then_some(v)
        })
    }
}

impl PartialEq for StateKey {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for StateKey {}

impl Hash for StateKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.text.hash(state);
    }
}

impl PartialOrd for StateKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StateKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.text.cmp(&other.text)
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateKey({})", self.text)
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for StateKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for StateKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Ok(StateKey::parse(text))
    }
}

/// The branch a helper picks at a non-terminal state.
///
/// Ordering is `nohelp < help1 < help2 < ...`, which is also the tie-break
/// order used by every solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    NoHelp,
    /// Intervention index, 1-based.
    Help(u8),
}

impl ActionKind {
    /// `help{index}`; `index` is 1-based.
    pub fn help(index: usize) -> Self {
        assert!(
            (1..=u8::MAX as usize).contains(&index),
            "intervention index {index} out of range"
        );
        ActionKind::Help(index as u8)
    }

    /// 1-based intervention index, `None` for nohelp.
    pub fn intervention(self) -> Option<usize> {
        match self {
            ActionKind::NoHelp => None,
            ActionKind::Help(i) => Some(i as usize),
        }
    }

    pub fn is_help(self) -> bool {
        matches!(self, ActionKind::Help(_))
    }

    /// Dense position: nohelp = 0, help_i = i.
    pub fn slot(self) -> usize {
        self.intervention().unwrap_or(0)
    }

    /// `nohelp, help1, ..., help{k}`.
    pub fn all(k: usize) -> impl Iterator<Item = ActionKind> {
        std::iter::once(ActionKind::NoHelp).chain((1..=k).map(ActionKind::help))
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionKind::NoHelp => f.write_str("nohelp"),
            ActionKind::Help(i) => write!(f, "help{i}"),
        }
    }
}

impl FromStr for ActionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nohelp" => Ok(ActionKind::NoHelp),
            "help" => Ok(ActionKind::Help(1)),
            _ => {
                let idx = s
                    .strip_prefix("help")
                    .and_then(|d| d.parse::<u8>().ok())
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| Error::Parse(format!("unknown action `{s}`")))?;
                Ok(ActionKind::Help(idx))
            }
        }
    }
}

impl Serialize for ActionKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActionKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

//! Line-delimited file formats and provenance headers.
//!
//! JSONL files may start with a `{"header": {...}}` line carrying the config
//! hash and seed of the run that wrote them; readers skip it. Single-document
//! JSON files carry the same data in a top-level `provenance` field.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::key::{ActionKind, StateKey};
use crate::model::TransitionModel;
use crate::success::{Provenance, SuccessModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: Header,
}

fn json_err(path: &Path, line: usize, source: serde_json::Error) -> Error {
    Error::Json {
        path: path.display().to_string(),
        line,
        source,
    }
}

pub fn write_jsonl<T: Serialize>(
    path: impl AsRef<Path>,
    header: Option<&Header>,
    items: impl IntoIterator<Item = T>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    if let Some(h) = header {
        let line = serde_json::to_string(&HeaderLine { header: h.clone() }).map_err(|e| json_err(path, 0, e))?;
        writeln!(out, "{line}")?;
    }
    for (i, item) in items.into_iter().enumerate() {
        let line = serde_json::to_string(&item).map_err(|e| json_err(path, i + 1, e))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads records, returning the header if the first line is one. Blank lines
/// are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<(Option<Header>, Vec<T>)> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut header = None;
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 && line.starts_with("{\"header\"") {
            let h: HeaderLine = serde_json::from_str(&line).map_err(|e| json_err(path, 1, e))?;
            header = Some(h.header);
            continue;
        }
        items.push(serde_json::from_str(&line).map_err(|e| json_err(path, i + 1, e))?);
    }
    Ok((header, items))
}

/// Writes a pretty-printed JSON document with a `provenance` field added to
/// its top-level object.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, header: Option<&Header>, doc: &T) -> Result<()> {
    let path = path.as_ref();
    let mut value = serde_json::to_value(doc).map_err(|e| json_err(path, 0, e))?;
    if let (Some(h), Some(obj)) = (header, value.as_object_mut()) {
        obj.insert(
            "provenance".into(),
            serde_json::to_value(h).map_err(|e| json_err(path, 0, e))?,
        );
    }
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| json_err(path, 0, e))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| json_err(path, 1, e))
}

/// Header embedded in a JSON document, if any.
pub fn read_json_header(path: impl AsRef<Path>) -> Result<Option<Header>> {
    #[derive(Deserialize)]
    struct WithProvenance {
        provenance: Option<Header>,
    }
    Ok(read_json::<WithProvenance>(path)?.provenance)
}

/// One line of a transitions file: a count for estimated models, a
/// probability for exact ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub state: StateKey,
    pub action: ActionKind,
    pub next: StateKey,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

pub fn write_counts(path: impl AsRef<Path>, header: Option<&Header>, table: &CountTable) -> Result<()> {
    write_jsonl(
        path,
        header,
        table.iter().map(|(s, a, s2, n)| TransitionRecord {
            state: s.clone(),
            action: a,
            next: s2.clone(),
            count: Some(n),
            p: None,
        }),
    )
}

pub fn write_model(path: impl AsRef<Path>, header: Option<&Header>, model: &TransitionModel) -> Result<()> {
    write_jsonl(
        path,
        header,
        model.entries().map(|(s, a, s2, p)| TransitionRecord {
            state: s.clone(),
            action: a,
            next: s2.clone(),
            count: None,
            p: Some(p),
        }),
    )
}

/// Contents of a transitions file.
#[derive(Clone, Debug)]
pub enum Transitions {
    Counts(CountTable),
    Exact(TransitionModel),
}

impl Transitions {
    /// Normalized model; `alpha` only affects count files.
    pub fn into_model(self, alpha: f64) -> Result<TransitionModel> {
        match self {
            Transitions::Counts(t) => TransitionModel::normalize_smoothed(&t, alpha),
            Transitions::Exact(m) => Ok(m),
        }
    }
}

pub fn read_transitions(path: impl AsRef<Path>) -> Result<(Option<Header>, Transitions)> {
    let path = path.as_ref();
    let (header, records): (_, Vec<TransitionRecord>) = read_jsonl(path)?;
    if records.is_empty() {
        return Err(Error::NoData);
    }
    let bad = |r: &TransitionRecord| {
        Error::Parse(format!(
            "{}: record ({}, {}, {}) must carry exactly one of `count` and `p`, consistently",
            path.display(),
            r.state,
            r.action,
            r.next
        ))
    };
    if records[0].count.is_some() {
        let mut table = CountTable::new();
        for r in &records {
            let (Some(n), None) = (r.count, r.p) else { return Err(bad(r)) };
            table.record_n(&r.state, r.action, &r.next, n)?;
        }
        Ok((header, Transitions::Counts(table)))
    } else {
        let mut rows: Vec<(StateKey, ActionKind, Vec<(StateKey, f64)>)> = Vec::new();
        for r in &records {
            let (None, Some(p)) = (r.count, r.p) else { return Err(bad(r)) };
            match rows.last_mut() {
                Some((s, a, dist)) if *s == r.state && *a == r.action => dist.push((r.next.clone(), p)),
                _ => rows.push((r.state.clone(), r.action, vec![(r.next.clone(), p)])),
            }
        }
        Ok((header, Transitions::Exact(TransitionModel::from_rows(rows)?)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessRecord {
    pub state: StateKey,
    pub action: ActionKind,
    pub p: f64,
    pub n: u64,
    pub provenance: Provenance,
}

pub fn write_success(path: impl AsRef<Path>, header: Option<&Header>, model: &SuccessModel) -> Result<()> {
    write_jsonl(
        path,
        header,
        model.iter().map(|(s, a, e)| SuccessRecord {
            state: s.clone(),
            action: a,
            p: e.p,
            n: e.n,
            provenance: model.provenance(),
        }),
    )
}

/// Reads a success file; an empty file yields an empty empirical model.
pub fn read_success(path: impl AsRef<Path>) -> Result<(Option<Header>, SuccessModel)> {
    let (header, records): (_, Vec<SuccessRecord>) = read_jsonl(path)?;
    let provenance = records.first().map_or(Provenance::Empirical, |r| r.provenance);
    let mut model = SuccessModel::new(provenance);
    for r in records {
        model.insert(r.state, r.action, r.p, r.n)?;
    }
    Ok((header, model))
}

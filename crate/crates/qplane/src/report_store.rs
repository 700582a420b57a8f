//! Append-only run store: one newline-delimited JSON record per
//! verification run, identified by 1-based line number, with an entry-wise
//! diff between any two runs for regression comparison.

use chrono::{SecondsFormat, Utc};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("store line {line} is corrupt: {detail}")]
    Corrupt { line: u64, detail: String },
    #[error("no run with id {0} in the store")]
    NotFound(u64),
}

/// Stable digest of a canonicalized config: serialized with sorted keys
/// (the serializer's map is ordered), hashed with SHA-256, rendered as hex.
pub fn config_hash(config: &Value) -> String {
    let canonical = config.to_string();
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}

/// One persisted verification run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    /// RFC 3339 UTC timestamp.
    pub timestamp: String,
    pub config_hash: String,
    pub suite: String,
    pub payload: Value,
    pub pass: bool,
    pub tool_version: String,
}

impl RunRecord {
    /// Stamp a fresh record for a suite result against a config.
    pub fn new(
        config: &Value,
        suite: impl Into<String>,
        payload: Value,
        pass: bool,
        tool_version: impl Into<String>,
    ) -> Self {
        RunRecord {
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            config_hash: config_hash(config),
            suite: suite.into(),
            payload,
            pass,
            tool_version: tool_version.into(),
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "timestamp": self.timestamp,
            "config_hash": self.config_hash,
            "suite": self.suite,
            "payload": self.payload,
            "pass": self.pass,
            "tool_version": self.tool_version,
        })
    }

    fn from_json(v: &Value) -> Result<Self, String> {
        let field = |name: &str| v.get(name).ok_or_else(|| format!("missing field `{}`", name));
        let str_field = |name: &str| {
            field(name).and_then(|f| {
                f.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| format!("field `{}` is not a string", name))
            })
        };
        Ok(RunRecord {
            timestamp: str_field("timestamp")?,
            config_hash: str_field("config_hash")?,
            suite: str_field("suite")?,
            payload: field("payload")?.clone(),
            pass: field("pass")?
                .as_bool()
                .ok_or_else(|| "field `pass` is not a boolean".to_string())?,
            tool_version: str_field("tool_version")?,
        })
    }
}

/// One changed leaf between two run payloads.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffRow {
    /// JSON path of the leaf, e.g. `entries[3].computed`.
    pub path: String,
    pub a: String,
    pub b: String,
}

/// Entry-wise difference of two runs. Swapping the two ids swaps the `a`/`b`
/// columns and the transition direction — the diff is symmetric up to that
/// sign.
#[derive(Clone, Debug)]
pub struct RunDiff {
    pub id_a: u64,
    pub id_b: u64,
    /// The two runs were produced from different configs.
    pub config_mismatch: bool,
    /// `Some((pass_a, pass_b))` when the outcomes differ.
    pub pass_transition: Option<(bool, bool)>,
    pub changed: Vec<DiffRow>,
}

impl RunDiff {
    /// Regression-clean: same config, same outcome, no changed entries.
    pub fn is_clean(&self) -> bool {
        !self.config_mismatch && self.pass_transition.is_none() && self.changed.is_empty()
    }
}

fn render_leaf(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn diff_values(path: &str, a: Option<&Value>, b: Option<&Value>, out: &mut Vec<DiffRow>) {
    match (a, b) {
        (None, None) => {}
        (Some(av), Some(bv)) => match (av, bv) {
            (Value::Object(ao), Value::Object(bo)) => {
                let keys: std::collections::BTreeSet<&String> =
                    ao.keys().chain(bo.keys()).collect();
                for k in keys {
                    let sub = if path.is_empty() {
                        k.clone()
                    } else {
                        format!("{}.{}", path, k)
                    };
                    diff_values(&sub, ao.get(k), bo.get(k), out);
                }
            }
            (Value::Array(aa), Value::Array(ba)) => {
                for i in 0..aa.len().max(ba.len()) {
                    diff_values(&format!("{}[{}]", path, i), aa.get(i), ba.get(i), out);
                }
            }
            _ => {
                if av != bv {
                    out.push(DiffRow {
                        path: path.to_string(),
                        a: render_leaf(av),
                        b: render_leaf(bv),
                    });
                }
            }
        },
        (Some(av), None) => out.push(DiffRow {
            path: path.to_string(),
            a: render_leaf(av),
            b: "absent".into(),
        }),
        (None, Some(bv)) => out.push(DiffRow {
            path: path.to_string(),
            a: "absent".into(),
            b: render_leaf(bv),
        }),
    }
}

/// The newline-delimited JSON store. Single writer; ids are line numbers
/// and never move because the file is append-only.
#[derive(Clone, Debug)]
pub struct RunStore {
    path: PathBuf,
}

impl RunStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        RunStore { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of records currently stored.
    pub fn len(&self) -> Result<u64, StoreError> {
        if !self.path.exists() {
            return Ok(0);
        }
        let reader = BufReader::new(std::fs::File::open(&self.path)?);
        Ok(reader.lines().count() as u64)
    }

    pub fn is_empty(&self) -> Result<bool, StoreError> {
        Ok(self.len()? == 0)
    }

    /// Append a record; the returned id is its 1-based line number.
    pub fn append(&self, record: &RunRecord) -> Result<u64, StoreError> {
        let id = self.len()? + 1;
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(file, "{}", record.to_json())?;
        Ok(id)
    }

    /// Read one record back by id.
    pub fn read(&self, id: u64) -> Result<RunRecord, StoreError> {
        if id == 0 || !self.path.exists() {
            return Err(StoreError::NotFound(id));
        }
        let reader = BufReader::new(std::fs::File::open(&self.path)?);
        let Some(line) = reader.lines().nth(id as usize - 1) else {
            return Err(StoreError::NotFound(id));
        };
        let line = line?;
        let value: Value = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            line: id,
            detail: e.to_string(),
        })?;
        RunRecord::from_json(&value).map_err(|detail| StoreError::Corrupt { line: id, detail })
    }

    /// Entry-wise diff of two stored runs.
    pub fn diff(&self, id_a: u64, id_b: u64) -> Result<RunDiff, StoreError> {
        let a = self.read(id_a)?;
        let b = self.read(id_b)?;
        let mut changed = Vec::new();
        diff_values("", Some(&a.payload), Some(&b.payload), &mut changed);
        Ok(RunDiff {
            id_a,
            id_b,
            config_mismatch: a.config_hash != b.config_hash,
            pass_transition: (a.pass != b.pass).then_some((a.pass, b.pass)),
            changed,
        })
    }
}

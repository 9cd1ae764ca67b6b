use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use toml::{Table, Value};

pub const COMMANDS: [&str; 7] = ["simulate", "soliton", "norms", "verify", "ladder", "channel", "sweep"];

/// Why a run did not produce its artifacts.
#[derive(Debug)]
pub enum RunError {
    /// Rejected before any compute; `path` names the offending field.
    Invalid { path: String, msg: String },
    Failed(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Invalid { path, msg } => write!(f, "{path}: {msg}"),
            RunError::Failed(msg) => f.write_str(msg),
        }
    }
}

impl RunError {
    pub fn invalid(path: impl Into<String>, msg: impl Into<String>) -> Self {
        RunError::Invalid { path: path.into(), msg: msg.into() }
    }

    pub fn failed(e: impl fmt::Display) -> Self {
        RunError::Failed(e.to_string())
    }
}

/// A parsed experiment: the command, its target (for `verify`), a seed,
/// an output directory and one parameter table per section.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: String,
    pub target: Option<String>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub output_dir: PathBuf,
    pub sections: Table,
}

const TOP_KEYS: [&str; 5] = ["command", "target", "seed", "tol", "output_dir"];

impl ExperimentConfig {
    /// Build from a TOML tree. Top-level scalars are `command`, `target`,
    /// `seed`, `tol` and `output_dir`; every table is a parameter section.
    pub fn from_table(mut t: Table) -> Result<Self, RunError> {
        let command = match t.remove("command") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(RunError::invalid("command", "must be a string")),
            None => return Err(RunError::invalid("command", "missing")),
        };
        if !COMMANDS.contains(&command.as_str()) {
            return Err(RunError::invalid("command", format!("unknown command `{command}`, expected one of {}", COMMANDS.join(", "))));
        }
        let target = match t.remove("target") {
            Some(Value::String(s)) => Some(s),
            Some(_) => return Err(RunError::invalid("target", "must be a string")),
            None => None,
        };
        let seed = match t.remove("seed") {
            Some(Value::Integer(i)) if i >= 0 => i as u64,
            Some(_) => return Err(RunError::invalid("seed", "must be a nonnegative integer")),
            None => 0,
        };
        let tol = match t.remove("tol") {
            Some(v) => Some(number(&v).filter(|x| *x > 0.0).ok_or_else(|| RunError::invalid("tol", "must be a positive number"))?),
            None => None,
        };
        let output_dir = match t.remove("output_dir") {
            Some(Value::String(s)) => PathBuf::from(s),
            Some(_) => return Err(RunError::invalid("output_dir", "must be a string")),
            None => PathBuf::from("out"),
        };
        for (k, v) in &t {
            if !v.is_table() {
                return Err(RunError::invalid(k.as_str(), format!("unknown top-level key (expected one of {} or a section)", TOP_KEYS.join(", "))));
            }
            if !COMMANDS.contains(&k.as_str()) {
                return Err(RunError::invalid(k.as_str(), "unknown section"));
            }
        }
        Ok(Self { command, target, seed, tol, output_dir, sections: t })
    }

    pub fn load(path: &Path) -> Result<Table, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::invalid("config", format!("{}: {e}", path.display())))?;
        text.parse::<Table>().map_err(|e| RunError::invalid("config", e.message().to_string()))
    }

    /// Parameter table of `section`, empty when absent.
    pub fn section(&self, name: &str) -> Table {
        match self.sections.get(name) {
            Some(Value::Table(t)) => t.clone(),
            _ => Table::new(),
        }
    }

    /// Canonical JSON of everything that determines the artifacts.
    pub fn canonical(&self) -> serde_json::Value {
        serde_json::json!({
            "command": self.command,
            "target": self.target,
            "seed": self.seed,
            "tol": self.tol,
            "sections": toml_to_json(&Value::Table(self.sections.clone())),
        })
    }

    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.canonical()).unwrap_or_default();
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

fn toml_to_json(v: &Value) -> serde_json::Value {
    // toml tables are ordered maps, so the JSON is canonical
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

pub fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Parse a command-line override value as a TOML value, falling back to a
/// bare string.
pub fn parse_value(raw: &str) -> Value {
    format!("v = {raw}").parse::<Table>().ok().and_then(|mut t| t.remove("v")).unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Typed access to one parameter section, remembering which keys were
/// read so leftovers can be rejected.
pub struct Params {
    section: String,
    table: Table,
    used: RefCell<BTreeSet<String>>,
}

impl Params {
    pub fn new(section: &str, table: Table) -> Self {
        Self { section: section.to_string(), table, used: RefCell::new(BTreeSet::new()) }
    }

    pub fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.section)
    }

    pub fn err(&self, key: &str, msg: impl Into<String>) -> RunError {
        RunError::invalid(self.path(key), msg)
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.table.get(key)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, RunError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => match number(v) {
                Some(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.err(key, "must be a finite number")),
            },
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64, RunError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, RunError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(self.err(key, "must be a nonnegative integer")),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool, RunError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(self.err(key, "must be true or false")),
        }
    }

    pub fn opt_string(&self, key: &str) -> Result<Option<String>, RunError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.err(key, "must be a string")),
        }
    }

    /// A string restricted to `choices`.
    pub fn choice(&self, key: &str, default: &str, choices: &[&str]) -> Result<String, RunError> {
        let s = self.opt_string(key)?.unwrap_or_else(|| default.to_string());
        if choices.contains(&s.as_str()) {
            Ok(s)
        } else {
            Err(self.err(key, format!("must be one of {}, got `{s}`", choices.join(", "))))
        }
    }

    pub fn opt_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, RunError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .enumerate()
                .map(|(i, v)| number(v).filter(|x| x.is_finite()).ok_or_else(|| RunError::invalid(format!("{}[{i}]", self.path(key)), "must be a finite number")))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(v) => number(v).map(|x| Some(vec![x])).ok_or_else(|| self.err(key, "must be a list of numbers")),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, RunError> {
        Ok(self.opt_f64_list(key)?.unwrap_or_else(|| default.to_vec()))
    }

    pub fn string_list(&self, key: &str, default: &[&str]) -> Result<Vec<String>, RunError> {
        match self.get(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(Value::Array(a)) => a
                .iter()
                .enumerate()
                .map(|(i, v)| v.as_str().map(str::to_string).ok_or_else(|| RunError::invalid(format!("{}[{i}]", self.path(key)), "must be a string")))
                .collect(),
            Some(Value::String(s)) => Ok(vec![s.clone()]),
            Some(_) => Err(self.err(key, "must be a list of strings")),
        }
    }

    pub fn raw(&self, key: &str) -> Option<Value> {
        self.get(key).cloned()
    }

    /// Reject keys that no accessor asked for.
    pub fn finish(&self) -> Result<(), RunError> {
        let used = self.used.borrow();
        match self.table.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(self.err(k, "unknown parameter")),
            None => Ok(()),
        }
    }
}

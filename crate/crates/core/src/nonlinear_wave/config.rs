use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldPair;
use crate::grid::RadialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn sigma(self) -> f64 {
        match self {
            Sign::Focusing => 1.0,
            Sign::Defocusing => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    LeapfrogU,
    CharacteristicsW,
}

/// External source `f(r, t)` added to the right-hand side for `u`.
#[derive(Clone)]
pub struct Forcing(pub Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl Forcing {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
    pub fn eval(&self, r: f64, t: f64) -> f64 {
        (self.0)(r, t)
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Forcing(..)")
    }
}

/// Parameters of a run. `forcing` is not serialized.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub p: f64,
    pub sign: Sign,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Abort when `sup |u|` exceeds this multiple of its initial value.
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    pub t_final: f64,
    /// Time between stored snapshots; defaults to `t_final / 100`.
    #[serde(default)]
    pub snapshot_interval: Option<f64>,
    #[serde(skip)]
    pub forcing: Option<Forcing>,
}

fn default_cfl() -> f64 {
    0.5
}
fn default_scheme() -> Scheme {
    Scheme::LeapfrogU
}
fn default_threshold() -> f64 {
    1e6
}

impl EvolutionConfig {
    pub fn new(p: f64, sign: Sign, t_final: f64) -> Self {
        Self {
            p,
            sign,
            cfl: default_cfl(),
            scheme: default_scheme(),
            blowup_threshold: default_threshold(),
            t_final,
            snapshot_interval: None,
            forcing: None,
        }
    }

    /// Field path and message of the first violated constraint.
    pub fn validate(&self) -> Result<(), (String, String)> {
        if !(self.p > 3.0 && self.p <= 5.0) {
            return Err(("p".into(), format!("must satisfy 3 < p <= 5, got {}", self.p)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(("cfl".into(), format!("must satisfy 0 < cfl <= 1, got {}", self.cfl)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(("t_final".into(), format!("must be finite and nonnegative, got {}", self.t_final)));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(("blowup_threshold".into(), "must exceed 1".into()));
        }
        if let Some(dt) = self.snapshot_interval {
            if !(dt > 0.0) {
                return Err(("snapshot_interval".into(), "must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn snapshot_dt(&self) -> f64 {
        self.snapshot_interval.unwrap_or(self.t_final / 100.0).max(1e-12)
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    /// `sup |u|` crossed the threshold (or the state became non-finite).
    Blowup {
        t_est: f64,
        /// `(t, sup|u|, T_est)` at each decade crossing of `sup |u|`.
        estimates: Vec<(f64, f64, f64)>,
        non_finite: bool,
    },
    Truncated { reason: String },
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshots.csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("grid: {0}")]
    Grid(#[from] crate::grid::GridError),
}

/// Time-ordered snapshots of a run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: EvolutionConfig,
    pub grid: Arc<RadialGrid>,
    pub times: Vec<f64>,
    pub snapshots: Vec<FieldPair>,
    pub status: Status,
    /// Energy at each snapshot.
    pub energies: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StoredStatus {
    #[serde(flatten)]
    status: Status,
    grid: RadialGrid,
    energies: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &FieldPair {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Relative energy drift `max |E(t) - E(0)| / max(|E(0)|, 1)`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.abs().max(1.0)
    }

    /// Write `config.json`, `snapshots.csv` (long form `t,r,u,ut`) and
    /// `status.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), TrajectoryError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), serde_json::to_string_pretty(&self.config)?)?;
        let mut out = std::io::BufWriter::new(fs::File::create(dir.join("snapshots.csv"))?);
        writeln!(out, "t,r,u,ut")?;
        for (t, f) in self.times.iter().zip(&self.snapshots) {
            for i in 0..f.u.len() {
                writeln!(out, "{},{},{},{}", t, f.radii()[i], f.u[i], f.ut[i])?;
            }
        }
        out.flush()?;
        let stored = StoredStatus { status: self.status.clone(), grid: (*self.grid).clone(), energies: self.energies.clone() };
        fs::write(dir.join("status.json"), serde_json::to_string_pretty(&stored)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, TrajectoryError> {
        let config: EvolutionConfig = serde_json::from_str(&fs::read_to_string(dir.join("config.json"))?)?;
        let stored: StoredStatus = serde_json::from_str(&fs::read_to_string(dir.join("status.json"))?)?;
        let grid = Arc::new(stored.grid);
        let n = grid.len();
        let reader = BufReader::new(fs::File::open(dir.join("snapshots.csv"))?);
        let mut times = Vec::new();
        let mut snapshots: Vec<FieldPair> = Vec::new();
        let mut cur = FieldPair::zeros(grid.clone());
        let mut k = 0;
        for (idx, line) in reader.lines().enumerate().skip(1) {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| TrajectoryError::Csv { line: idx + 1, msg: e.to_string() })?;
            if cols.len() != 4 {
                return Err(TrajectoryError::Csv { line: idx + 1, msg: "expected 4 columns".into() });
            }
            if k == 0 {
                times.push(cols[0]);
            }
            cur.u[k] = cols[2];
            cur.ut[k] = cols[3];
            k += 1;
            if k == n {
                snapshots.push(std::mem::replace(&mut cur, FieldPair::zeros(grid.clone())));
                k = 0;
            }
        }
        if k != 0 {
            return Err(TrajectoryError::Csv { line: 0, msg: "incomplete final snapshot".into() });
        }
        Ok(Self { config, grid, times, snapshots, status: stored.status, energies: stored.energies })
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical_index;
use crate::field::FieldPair;
use crate::spectral::{pair_norm, SobolevIndex};

use super::config::{EvolutionConfig, Status, Trajectory};
use super::evolve::{evolve, EvolveError};

/// Outcome of [`classify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Reached `t_final` with the critical pair norm below the cap.
    GlobalBounded { max_norm: f64 },
    /// Crossed the threshold with consecutive blow-up time estimates
    /// within 5%.
    Blowup { t_est: f64 },
    Undecided { reason: String },
}

/// Relative agreement required between blow-up time estimates.
const CAUCHY_TOL: f64 = 0.05;

/// Classify a finished or aborted run. The critical norm is the
/// `Ḣ^{s_p} × Ḣ^{s_p - 1}` norm, checked on at most 21 evenly spread
/// snapshots.
pub fn classify(traj: &Trajectory, s_p_norm_cap: f64) -> Verdict {
    match &traj.status {
        Status::Blowup { estimates, non_finite, .. } => {
            let n = estimates.len();
            if n < 2 {
                let why = if *non_finite { "non-finite state" } else { "threshold crossed" };
                return Verdict::Undecided { reason: format!("{why} with {n} blow-up time estimate(s)") };
            }
            let (a, b) = (estimates[n - 2].2, estimates[n - 1].2);
            if (a - b).abs() <= CAUCHY_TOL * b.abs() {
                Verdict::Blowup { t_est: b }
            } else {
                Verdict::Undecided { reason: format!("blow-up time estimates {a} and {b} disagree") }
            }
        }
        Status::Truncated { reason } => Verdict::Undecided { reason: reason.clone() },
        Status::Completed => {
            let s = match SobolevIndex::new(critical_index(traj.config.p)) {
                Ok(s) => s,
                Err(e) => return Verdict::Undecided { reason: e.to_string() },
            };
            let k = traj.snapshots.len();
            let stride = k.div_ceil(21).max(1);
            let mut picks: Vec<&FieldPair> = traj.snapshots.iter().step_by(stride).collect();
            if (k - 1) % stride != 0 {
                picks.push(traj.last());
            }
            let norms: Result<Vec<f64>, _> = picks.par_iter().map(|f| pair_norm(f, s).map(|r| r.value)).collect();
            match norms {
                Ok(v) => {
                    let max_norm = v.into_iter().fold(0.0, f64::max);
                    if max_norm <= s_p_norm_cap {
                        Verdict::GlobalBounded { max_norm }
                    } else {
                        Verdict::Undecided { reason: format!("critical norm {max_norm} exceeds cap {s_p_norm_cap}") }
                    }
                }
                Err(e) => Verdict::Undecided { reason: format!("critical norm unavailable: {e}") },
            }
        }
    }
}

/// Blow-up time estimates under successive halvings of the time step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupStudy {
    pub cfl: Vec<f64>,
    /// Final estimate of each run, `None` when the run did not blow up.
    pub t_est: Vec<Option<f64>>,
    /// Every consecutive pair of estimates agrees within 5%.
    pub cauchy: bool,
    pub verdicts: Vec<Verdict>,
}

/// Run `levels` evolutions with `cfl · 2^{-k}` and compare their blow-up
/// time estimates.
pub fn blowup_time_study(f0: &FieldPair, cfg: &EvolutionConfig, levels: usize, cap: f64) -> Result<BlowupStudy, EvolveError> {
    let runs: Result<Vec<(f64, Trajectory)>, EvolveError> = (0..levels)
        .into_par_iter()
        .map(|k| {
            let mut c = cfg.clone();
            c.cfl = cfg.cfl * 0.5f64.powi(k as i32);
            evolve(f0, &c).map(|t| (c.cfl, t))
        })
        .collect();
    let runs = runs?;
    let verdicts: Vec<Verdict> = runs.iter().map(|(_, t)| classify(t, cap)).collect();
    let t_est: Vec<Option<f64>> = verdicts
        .iter()
        .map(|v| match v {
            Verdict::Blowup { t_est } => Some(*t_est),
            _ => None,
        })
        .collect();
    let cauchy = t_est.iter().all(Option::is_some)
        && t_est.windows(2).all(|w| {
            let (a, b) = (w[0].unwrap(), w[1].unwrap());
            (a - b).abs() <= CAUCHY_TOL * b.abs()
        });
    Ok(BlowupStudy { cfl: runs.iter().map(|r| r.0).collect(), t_est, cauchy, verdicts })
}

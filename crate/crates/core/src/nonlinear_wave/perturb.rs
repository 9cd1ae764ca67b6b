use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldPair;
use crate::grid::RadialGrid;
use crate::linear_wave::{SampledSource, SpaceTimeSource};
use crate::numerics::fit_slope;

use super::config::{EvolutionConfig, Trajectory};
use super::evolve::{evolve_with, EvolveError};
use super::nonlinearity;

/// A background solution `V(r, t)` known on a time window.
#[derive(Clone)]
pub struct Background {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub window: (f64, f64),
}

impl std::fmt::Debug for Background {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Background {{ window: {:?} }}", self.window)
    }
}

impl Background {
    pub fn zero() -> Self {
        Self::from_fn(|_, _| 0.0, (f64::NEG_INFINITY, f64::INFINITY))
    }

    pub fn from_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, window: (f64, f64)) -> Self {
        Self { eval: Arc::new(f), window }
    }

    /// Time-independent background sampled on `grid` (cubic in space, zero
    /// beyond the grid).
    pub fn stationary(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        Self::from_fn(move |r, _| grid.interpolate(&values, r).unwrap_or(0.0), (f64::NEG_INFINITY, f64::INFINITY))
    }

    /// Background read off a computed trajectory, linear in time between
    /// snapshots.
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let src = SampledSource {
            grid: traj.grid.clone(),
            times: traj.times.clone(),
            values: traj.snapshots.iter().map(|f| f.u.clone()).collect(),
        };
        let window = (traj.times[0], traj.final_time());
        Self::from_fn(move |r, t| src.eval(r, t), window)
    }

    pub fn eval(&self, r: f64, t: f64) -> f64 {
        (self.eval)(r, t)
    }

    /// The background multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let inner = self.eval.clone();
        Self::from_fn(move |r, t| k * inner(r, t), self.window)
    }
}

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("background known on [{lo}, {hi}] does not cover [0, {t_final}]")]
    Window { lo: f64, hi: f64, t_final: f64 },
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error("initial perturbation is not compactly supported on the grid (radius {radius}, r_max {r_max})")]
    NotCompact { radius: f64, r_max: f64 },
}

/// Perturbation `h` of a background and its free counterpart.
#[derive(Debug, Clone)]
pub struct PerturbationReport {
    pub h: Trajectory,
    /// Same data and scheme with the nonlinearity switched off.
    pub linear: Trajectory,
    /// `‖(h, h_t) - (h_L, ∂_t h_L)‖_{Ḣ¹×L²}` at each common snapshot.
    pub deviation: Vec<f64>,
    pub sup_deviation: f64,
    /// `‖(h₀, h₁)‖_{Ḣ¹×L²}`.
    pub data_norm: f64,
}

impl PerturbationReport {
    /// `sup_deviation / data_norm` (0 for zero data).
    pub fn ratio(&self) -> f64 {
        if self.data_norm > 0.0 {
            self.sup_deviation / self.data_norm
        } else {
            0.0
        }
    }
}

fn energy_norm(f: &FieldPair) -> f64 {
    f.total_ring_energy().sqrt()
}

/// Solve `h_tt - Δh = F(V + h) - F(V)` with data `h0` and compare with the
/// free evolution of the same data.
pub fn perturbed_evolve(v: &Background, h0: &FieldPair, cfg: &EvolutionConfig) -> Result<PerturbationReport, PerturbError> {
    let (lo, hi) = v.window;
    if lo > 0.0 || hi < cfg.t_final {
        return Err(PerturbError::Window { lo, hi, t_final: cfg.t_final });
    }
    let (p, sign) = (cfg.p, cfg.sign);
    let g = |r: f64, u: f64, t: f64| {
        let b = v.eval(r, t);
        nonlinearity(b + u, p, sign) - nonlinearity(b, p, sign)
    };
    let mut plain = cfg.clone();
    plain.forcing = None;
    let h = evolve_with(h0, &plain, &g)?;
    let linear = evolve_with(h0, &plain, &|_, _, _| 0.0)?;
    let deviation: Vec<f64> = h
        .snapshots
        .iter()
        .zip(&linear.snapshots)
        .map(|(a, b)| {
            let d = FieldPair {
                grid: a.grid.clone(),
                u: a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect(),
                ut: a.ut.iter().zip(&b.ut).map(|(x, y)| x - y).collect(),
            };
            energy_norm(&d)
        })
        .collect();
    let sup_deviation = deviation.iter().copied().fold(0.0, f64::max);
    Ok(PerturbationReport { h, linear, deviation, sup_deviation, data_norm: energy_norm(h0) })
}

/// Deviation ratios for data `δ·h0` around the backgrounds `background(δ)`
/// and the log-log slope of ratio against `δ`.
pub fn perturbation_scaling(
    background: impl Fn(f64) -> Background,
    h0: &FieldPair,
    cfg: &EvolutionConfig,
    deltas: &[f64],
) -> Result<(Vec<(f64, f64)>, f64), PerturbError> {
    let mut rows = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let rep = perturbed_evolve(&background(d), &h0.scaled(d), cfg)?;
        rows.push((d, rep.ratio()));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    Ok((rows, fit_slope(&x, &y)))
}

/// One sample of the essential support radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSample {
    pub t: f64,
    pub radius: f64,
    /// `R(0) + |t|`.
    pub predicted: f64,
}

/// Largest radius where `|r u|` or `|r u_t|` exceeds `threshold`, or 0.
///
/// Measuring `w = r u` keeps the outgoing front a rigid translate, so the
/// threshold crossing moves at exactly unit speed.
pub fn support_radius(f: &FieldPair, threshold: f64) -> f64 {
    let r = f.radii();
    (0..r.len())
        .rev()
        .find(|&i| (r[i] * f.u[i]).abs() > threshold || (r[i] * f.ut[i]).abs() > threshold)
        .map_or(0.0, |i| r[i])
}

/// Essential support radius of each snapshot. The threshold is `tol` times
/// the largest `|r u|`, `|r u_t|` of the first snapshot.
pub fn support_radius_track(times: &[f64], snapshots: &[FieldPair], tol: f64) -> Result<Vec<RadiusSample>, PerturbError> {
    let Some(first) = snapshots.first() else {
        return Ok(Vec::new());
    };
    let r = first.radii();
    let scale = (0..r.len()).map(|i| (r[i] * first.u[i]).abs().max((r[i] * first.ut[i]).abs())).fold(0.0, f64::max);
    let threshold = tol * scale;
    let r0 = support_radius(first, threshold);
    let h = first.grid.step().unwrap_or(0.0);
    if r0 > first.grid.r_max() - 2.0 * h {
        return Err(PerturbError::NotCompact { radius: r0, r_max: first.grid.r_max() });
    }
    let t0 = times[0];
    Ok(times
        .iter()
        .zip(snapshots)
        .map(|(&t, f)| RadiusSample {
            t,
            radius: if scale > 0.0 { support_radius(f, threshold) } else { 0.0 },
            predicted: if scale > 0.0 { r0 + (t - t0).abs() } else { 0.0 },
        })
        .collect())
}

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::RadialGrid;
use crate::nonlinear_wave::Trajectory;
use crate::numerics::{simpson, trapezoid};

use super::{AnalysisError, NormKind};

/// A space-time norm with the exponents it used and a time-quadrature
/// error estimate (difference against the rule on every other sample).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormValue {
    pub kind: NormKind,
    pub q: f64,
    pub r: f64,
    pub interval: (f64, f64),
    pub samples: usize,
    pub value: f64,
    pub time_error: f64,
}

/// `(4π ∫ r² |u|^e dr)^{1/e}`.
pub fn radial_lebesgue(grid: &RadialGrid, u: &[f64], e: f64) -> f64 {
    let vals: Vec<f64> = grid.radii().iter().zip(u).map(|(r, v)| r * r * v.abs().powf(e)).collect();
    (4.0 * PI * grid.integrate(&vals)).max(0.0).powf(1.0 / e)
}

fn uniform_step(t: &[f64]) -> Option<f64> {
    let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    t.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300)).then_some(h)
}

fn time_integral(t: &[f64], f: &[f64]) -> f64 {
    match uniform_step(t) {
        Some(h) if t.len() >= 3 => simpson(f, h),
        _ => trapezoid(t, f),
    }
}

/// `L^q_t L^r_x` of samples `slices[k]` at `times[k]`.
pub fn spacetime_norm_samples(grid: &RadialGrid, times: &[f64], slices: &[&[f64]], q: f64, r: f64) -> Result<(f64, f64), AnalysisError> {
    if times.len() < 2 || times.len() != slices.len() {
        return Err(AnalysisError::Window { samples: times.len() });
    }
    let f: Vec<f64> = slices.iter().map(|u| radial_lebesgue(grid, u, r).powf(q)).collect();
    let fine = time_integral(times, &f);
    let error = if times.len() >= 5 {
        let (tc, fc): (Vec<f64>, Vec<f64>) = times.iter().zip(&f).step_by(2).map(|(a, b)| (*a, *b)).unzip();
        let coarse = time_integral(&tc, &fc);
        (fine.max(0.0).powf(1.0 / q) - coarse.max(0.0).powf(1.0 / q)).abs()
    } else {
        f64::NAN
    };
    Ok((fine.max(0.0).powf(1.0 / q), error))
}

/// The space-time norm of a trajectory over `interval` (the whole run for
/// `None`), using the snapshots that fall inside it.
pub fn spacetime_norm(traj: &Trajectory, kind: NormKind, interval: Option<(f64, f64)>) -> Result<NormValue, AnalysisError> {
    let (q, r) = kind.exponents(traj.config.p)?;
    let (a, b) = interval.unwrap_or((traj.times[0], traj.final_time()));
    let idx: Vec<usize> = (0..traj.times.len()).filter(|&k| traj.times[k] >= a - 1e-12 && traj.times[k] <= b + 1e-12).collect();
    let times: Vec<f64> = idx.iter().map(|&k| traj.times[k]).collect();
    let slices: Vec<&[f64]> = idx.iter().map(|&k| traj.snapshots[k].u.as_slice()).collect();
    let (value, time_error) = spacetime_norm_samples(&traj.grid, &times, &slices, q, r)?;
    Ok(NormValue { kind, q, r, interval: (a, b), samples: times.len(), value, time_error })
}

/// Several kinds at once, in parallel.
pub fn spacetime_norms(traj: &Trajectory, kinds: &[NormKind], interval: Option<(f64, f64)>) -> Result<Vec<NormValue>, AnalysisError> {
    kinds.par_iter().map(|k| spacetime_norm(traj, *k, interval)).collect()
}

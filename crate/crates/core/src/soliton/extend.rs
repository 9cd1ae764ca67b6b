use std::sync::Arc;

use ode_solvers::{Dopri5, OutputType, System, Vector2};
use serde::{Deserialize, Serialize};

use crate::grid::{RadialGrid, Spacing};

use super::profile::{power, Provenance, SolitonProfile};
use super::{SolitonError, TailProfile};

/// Relative tolerance of the inward integration.
pub const RTOL: f64 = 1e-10;

/// `ρ = 1 + φ = r y` as a function of `s = ln(R/r)`, with state
/// `(ρ, q = r ρ')`:
///
/// `dρ/ds = -q`, `dq/ds = F(ρ) r^{3-p} - q`.
struct Inward {
    p: f64,
    big_r: f64,
}

impl System<f64, Vector2<f64>> for Inward {
    fn system(&self, s: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        let r = self.big_r * (-s).exp();
        dy[0] = -y[1];
        dy[1] = power(y[0], self.p) * r.powf(3.0 - self.p) - y[1];
    }
}

/// `|ρ|^{p+1}/(p+1) + r^{p-1} ρ'²/2`, nonincreasing as `r` decreases.
pub fn lyapunov(p: f64, r: f64, rho: f64, q: f64) -> f64 {
    rho.abs().powf(p + 1.0) / (p + 1.0) + 0.5 * r.powf(p - 3.0) * q * q
}

/// Lyapunov monitor of an inward integration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest relative increase of the Lyapunov quantity between accepted
    /// steps (0 when it never increases).
    pub max_relative_increase: f64,
    /// `(r, value)` at every accepted step, from `R` inward.
    pub samples: Vec<(f64, f64)>,
}

/// Allowed relative increase between steps, a multiple of the tolerance.
const LYAPUNOV_SLACK: f64 = 100.0 * RTOL;

pub fn extend_inward(tail: &TailProfile, r_min: f64) -> Result<SolitonProfile, SolitonError> {
    extend_inward_report(tail, r_min).map(|(s, _)| s)
}

/// Integrate the `φ` equation from `R` down to `r_min` with an adaptive
/// Dormand–Prince pair and join the result to the tail. The returned grid
/// continues the tail's geometric grid and may start slightly below `r_min`.
pub fn extend_inward_report(tail: &TailProfile, r_min: f64) -> Result<(SolitonProfile, LyapunovReport), SolitonError> {
    let (p, big_r) = (tail.p, tail.r);
    if !(r_min > 0.0 && r_min < big_r) {
        return Err(SolitonError::Radius(r_min));
    }
    let dxi = tail.grid.log_step().unwrap();
    let k = ((big_r / r_min).ln() / dxi - 1e-9).ceil() as usize;
    let s_end = k as f64 * dxi;
    let y0 = Vector2::new(1.0 + tail.phi[0], big_r * tail.dphi[0]);

    let run = |out: OutputType| -> Result<(Vec<f64>, Vec<Vector2<f64>>, ode_solvers::dop_shared::Stats), SolitonError> {
        let mut solver = Dopri5::new(Inward { p, big_r }, 0.0, s_end, dxi, y0, RTOL, 1e-14);
        solver.set_output(out);
        let stats = solver.integrate().map_err(|e| SolitonError::Integrator(e.to_string()))?;
        Ok((solver.x_out().clone(), solver.y_out().clone(), stats))
    };

    // Accepted steps, for the Lyapunov monitor.
    let (xs, ys, stats) = run(OutputType::Sparse)?;
    let mut samples = Vec::with_capacity(xs.len());
    let mut worst: f64 = 0.0;
    for (s, y) in xs.iter().zip(&ys) {
        let r = big_r * (-s).exp();
        let v = lyapunov(p, r, y[0], y[1]);
        if !v.is_finite() {
            return Err(SolitonError::Integrator(format!("non-finite state at r = {r}")));
        }
        if let Some(&(_, last)) = samples.last() {
            worst = worst.max((v - last) / f64::max(last, f64::MIN_POSITIVE));
        }
        samples.push((r, v));
    }
    if let Some(&(r_last, _)) = samples.last() {
        if r_last > r_min * (1.0 + 1e-9) && (big_r * (-s_end).exp()) < r_last * (1.0 - 1e-9) {
            return Err(SolitonError::Integrator(format!("integration stopped at r = {r_last}")));
        }
    }
    if worst > LYAPUNOV_SLACK {
        let at = samples
            .windows(2)
            .find(|w| (w[1].1 - w[0].1) / w[0].1.max(f64::MIN_POSITIVE) > LYAPUNOV_SLACK)
            .map_or(r_min, |w| w[1].0);
        return Err(SolitonError::Lyapunov { r: at, increase: worst });
    }
    let report = LyapunovReport {
        accepted_steps: stats.accepted_steps as usize,
        rejected_steps: stats.rejected_steps as usize,
        max_relative_increase: worst,
        samples,
    };

    // Dense output on the lattice s = j·dξ.
    let (xs, ys, _) = run(OutputType::Dense)?;
    let mut inner: Vec<(f64, f64, f64)> = Vec::with_capacity(k);
    let mut last_j = 0;
    for (s, y) in xs.iter().zip(&ys) {
        let j = (s / dxi).round() as usize;
        if j <= last_j || j > k {
            continue;
        }
        last_j = j;
        let r = big_r * (-(j as f64) * dxi).exp();
        inner.push((r, y[0] / r, (y[1] - y[0]) / (r * r)));
    }
    if inner.len() != k {
        return Err(SolitonError::Integrator(format!("dense output produced {} of {k} nodes", inner.len())));
    }
    inner.reverse();
    let rt = tail.grid.radii();
    let n = k + rt.len();
    let grid = Arc::new(RadialGrid::new(inner[0].0, tail.grid.r_max(), n, Spacing::Geometric)?);
    let mut y = Vec::with_capacity(n);
    let mut yp = Vec::with_capacity(n);
    for &(_, a, b) in &inner {
        y.push(a);
        yp.push(b);
    }
    for ((r, phi), dphi) in rt.iter().zip(&tail.phi).zip(&tail.dphi) {
        y.push((1.0 + phi) / r);
        yp.push((r * dphi - phi - 1.0) / (r * r));
    }
    Ok((SolitonProfile { grid, y, yp, ypp: None, p, provenance: Provenance::BackwardExtension }, report))
}

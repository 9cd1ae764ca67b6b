use serde::{Deserialize, Serialize};

use crate::grid::RadialGrid;
use crate::nonlinear_wave::Trajectory;
use crate::numerics::fit_slope;

use super::ladder::g;
use super::AnalysisError;

/// `f_β(r) = sup_{t ∈ window, |x| >= r} |x|^β |u(x, t)|` on dyadic radii,
/// with the recurrence margins between consecutive radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FBetaProfile {
    pub beta: f64,
    pub p: f64,
    pub window: (f64, f64),
    /// Dyadic radii, decreasing.
    pub radii: Vec<f64>,
    pub f: Vec<f64>,
    pub nonincreasing: bool,
    /// Smallest `C >= 0` with `f(r₀) <= g(β) f(r₀/2) + C f(r₀/2)^p r₀^{2-(p-1)β}`
    /// at every pair of consecutive radii.
    pub fitted_c: f64,
    /// Log-log slope of `sup_t |x|^β |u|` over the outer decade; positive
    /// means `f_β` diverges as the window radius grows.
    pub outer_slope: f64,
    pub diverges_at_infinity: bool,
    /// The sup at some radius is attained at the last snapshot, so a longer
    /// window could still raise it.
    pub boundary_dominated: bool,
}

/// `f_β` of sampled fields `u_k` on `grid` at `times`.
pub fn fbeta_samples(grid: &RadialGrid, times: &[f64], slices: &[&[f64]], p: f64, beta: f64) -> Result<FBetaProfile, AnalysisError> {
    if times.len() < 2 || times.len() != slices.len() {
        return Err(AnalysisError::Window { samples: times.len() });
    }
    let r = grid.radii();
    let n = r.len();
    // Pointwise sup over time and the time index attaining it.
    let mut env = vec![0.0f64; n];
    let mut arg = vec![0usize; n];
    for (k, u) in slices.iter().enumerate() {
        for i in 0..n {
            let v = r[i].powf(beta) * u[i].abs();
            if v > env[i] {
                env[i] = v;
                arg[i] = k;
            }
        }
    }
    // Suffix sups: f_β at every node, with where it is attained.
    let mut suf = vec![0.0f64; n];
    let mut at = vec![n - 1; n];
    let (mut best, mut best_i) = (0.0, n - 1);
    for i in (0..n).rev() {
        if env[i] > best {
            best = env[i];
            best_i = i;
        }
        suf[i] = best;
        at[i] = best_i;
    }
    let r_pos = r.iter().copied().find(|&x| x > 0.0).unwrap_or(r[n - 1]);
    let mut radii = vec![];
    let mut f = vec![];
    let mut boundary_dominated = false;
    let mut rr = r[n - 1] / 2.0;
    while rr >= r_pos {
        let i = r.partition_point(|&x| x < rr).min(n - 1);
        radii.push(rr);
        f.push(suf[i]);
        if suf[i] > 0.0 && arg[at[i]] == slices.len() - 1 && slices.len() > 1 {
            boundary_dominated = true;
        }
        rr /= 2.0;
    }
    let nonincreasing = f.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12));
    let gb = g(beta);
    let mut fitted_c: f64 = 0.0;
    for k in 0..f.len().saturating_sub(1) {
        let (r0, f0, f1) = (radii[k], f[k], f[k + 1]);
        let excess = f0 - gb * f1;
        if excess > 0.0 {
            let den = f1.powf(p) * r0.powf(2.0 - (p - 1.0) * beta);
            fitted_c = fitted_c.max(if den > 0.0 { excess / den } else { f64::INFINITY });
        }
    }
    let outer: Vec<(f64, f64)> = (0..n).filter(|&i| r[i] >= r[n - 1] / 10.0 && env[i] > 0.0).map(|i| (r[i].ln(), env[i].ln())).collect();
    let outer_slope = if outer.len() > 2 {
        let (a, b): (Vec<f64>, Vec<f64>) = outer.into_iter().unzip();
        fit_slope(&a, &b)
    } else {
        0.0
    };
    Ok(FBetaProfile {
        beta,
        p,
        window: (times[0], times[times.len() - 1]),
        radii,
        f,
        nonincreasing,
        fitted_c,
        outer_slope,
        diverges_at_infinity: outer_slope > 1e-3,
        boundary_dominated,
    })
}

pub fn fbeta_profile(traj: &Trajectory, beta: f64) -> Result<FBetaProfile, AnalysisError> {
    let slices: Vec<&[f64]> = traj.snapshots.iter().map(|s| s.u.as_slice()).collect();
    fbeta_samples(&traj.grid, &traj.times, &slices, traj.config.p, beta)
}

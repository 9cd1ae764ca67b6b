use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::config::{Sign, Trajectory};

/// Terms of the defocusing Morawetz inequality over `[0, T]`:
///
/// 1. `(1/2R) ∫∫_{|x|<R} (|∇u|² + u_t²)`
/// 2. `(1/2R²) ∫∫_{|x|=R} u²`
/// 3. `(1/2R)·(2p-4)/(p+1) ∫∫_{|x|<R} |u|^{p+1}`
/// 4. `(p-1)/(p+1) ∫∫_{|x|>R} |u|^{p+1}/|x|`
/// 5. `(2/R²) ∫_{|x|<R} u(T)²`
///
/// whose sum is at most `2E`. Time integrals use the trapezoid rule over the
/// snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorawetzReport {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub p: f64,
    pub energy: f64,
    pub terms: [f64; 5],
    pub sum: f64,
    /// `2E - sum`.
    pub margin: f64,
    /// `∫₀^T ∫ |u|^{p+1}/|x|` over all space.
    pub weighted_potential: f64,
    /// `2(p+1)/(p-1)·E`.
    pub weighted_bound: f64,
    /// Running value of the weighted potential at each snapshot time.
    pub cumulative: Vec<(f64, f64)>,
}

impl MorawetzReport {
    pub fn terms_nonnegative(&self) -> bool {
        self.terms.iter().all(|&t| t >= 0.0)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.terms_nonnegative() && self.margin >= -tol && self.weighted_potential <= self.weighted_bound + tol
    }

    pub fn cumulative_monotone(&self) -> bool {
        self.cumulative.windows(2).all(|w| w[1].1 >= w[0].1)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MorawetzError {
    #[error("the Morawetz inequality needs a defocusing trajectory")]
    Focusing,
    #[error("R = {r} must lie inside the grid (r_max = {r_max})")]
    Radius { r: f64, r_max: f64 },
    #[error("trajectory contains non-finite snapshots")]
    NonFinite,
}

fn trapezoid_cumulative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = vec![0.0; t.len()];
    for i in 1..t.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        out[i] = acc;
    }
    out
}

/// Evaluate every term of the Morawetz inequality along `traj` at radius
/// `big_r`, with `E` the initial energy.
pub fn morawetz_report(traj: &Trajectory, big_r: f64) -> Result<MorawetzReport, MorawetzError> {
    if traj.config.sign != Sign::Defocusing {
        return Err(MorawetzError::Focusing);
    }
    let grid = &traj.grid;
    let r_max = grid.r_max();
    if !(big_r > 0.0 && big_r < r_max) {
        return Err(MorawetzError::Radius { r: big_r, r_max });
    }
    if traj.snapshots.iter().any(|f| !f.is_finite()) {
        return Err(MorawetzError::NonFinite);
    }
    let p = traj.config.p;
    let r = grid.radii();
    let n = r.len();
    let four_pi = 4.0 * PI;
    let k = traj.snapshots.len();
    let (mut inner_quad, mut boundary, mut inner_pot, mut outer_w, mut all_w) =
        (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    for (j, f) in traj.snapshots.iter().enumerate() {
        let ur = f.u_r();
        let quad: Vec<f64> = (0..n).map(|i| r[i] * r[i] * (ur[i] * ur[i] + f.ut[i] * f.ut[i])).collect();
        let pot: Vec<f64> = (0..n).map(|i| r[i] * r[i] * f.u[i].abs().powf(p + 1.0)).collect();
        let wpot: Vec<f64> = (0..n).map(|i| r[i] * f.u[i].abs().powf(p + 1.0)).collect();
        inner_quad[j] = four_pi * grid.integrate_range(&quad, 0.0, big_r);
        inner_pot[j] = four_pi * grid.integrate_range(&pot, 0.0, big_r);
        outer_w[j] = four_pi * grid.integrate_range(&wpot, big_r, r_max);
        all_w[j] = four_pi * grid.integrate(&wpot);
        let ub = grid.interpolate(&f.u, big_r).unwrap_or(0.0);
        boundary[j] = four_pi * big_r * big_r * ub * ub;
    }
    let t = &traj.times;
    let total = |y: &[f64]| *trapezoid_cumulative(t, y).last().unwrap_or(&0.0);
    let last = traj.last();
    let sq: Vec<f64> = (0..n).map(|i| r[i] * r[i] * last.u[i] * last.u[i]).collect();
    let terms = [
        total(&inner_quad) / (2.0 * big_r),
        total(&boundary) / (2.0 * big_r * big_r),
        total(&inner_pot) * (2.0 * p - 4.0) / (p + 1.0) / (2.0 * big_r),
        total(&outer_w) * (p - 1.0) / (p + 1.0),
        2.0 / (big_r * big_r) * four_pi * grid.integrate_range(&sq, 0.0, big_r),
    ];
    let energy = traj.energies.first().copied().unwrap_or(0.0);
    let sum: f64 = terms.iter().sum();
    let cum = trapezoid_cumulative(t, &all_w);
    Ok(MorawetzReport {
        r: big_r,
        t: traj.final_time(),
        p,
        energy,
        terms,
        sum,
        margin: 2.0 * energy - sum,
        weighted_potential: *cum.last().unwrap_or(&0.0),
        weighted_bound: 2.0 * (p + 1.0) / (p - 1.0) * energy,
        cumulative: t.iter().copied().zip(cum).collect(),
    })
}

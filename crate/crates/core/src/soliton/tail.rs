use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::{RadialGrid, Spacing};
use crate::numerics::{cumulative_uniform, fit_slope, Parity};

use super::SolitonError;

/// Fixed point `φ = r W - 1` of the tail map on `[R, r_far]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailProfile {
    pub p: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub grid: Arc<RadialGrid>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub iterations: usize,
    /// Largest observed ratio `d(φ_{n+1}, φ_n) / d(φ_n, φ_{n-1})`.
    pub contraction_factor: f64,
    /// A priori Lipschitz bound of the map on the ball the iterates stay in.
    pub contraction_bound: f64,
    /// Last sup-change of the iteration.
    pub final_change: f64,
    /// Size of the neglected quadratic term in the closed-form tail beyond
    /// `r_far`.
    pub truncation_error: f64,
    /// `max |φ| r^{p-3}` over the tail.
    pub envelope_c: f64,
    /// Log-log slope of `|φ|` against `r`.
    pub envelope_slope: f64,
}

/// Tuning of [`tail_fixed_point_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    /// Grid nodes per decade of `r`.
    pub per_decade: usize,
    /// The tail grid runs over at least this many decades and up to at
    /// least `1e6`.
    pub min_decades: usize,
    pub max_iterations: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { per_decade: 400, min_decades: 5, max_iterations: 500 }
    }
}

/// `|L(0)(R)| = R^{3-p}/((p-2)(p-3))`.
fn first_iterate_size(p: f64, big_r: f64) -> f64 {
    big_r.powf(3.0 - p) / ((p - 2.0) * (p - 3.0))
}

/// Lipschitz bound `p (1 + 2m)^{p-1} / ((p-2)(p-3) R^{p-3})` of the tail map
/// on functions with `|φ| <= 2m`, `m = |L(0)(R)|`.
pub fn contraction_bound(p: f64, big_r: f64) -> f64 {
    let m = first_iterate_size(p, big_r);
    p * (1.0 + 2.0 * m).powf(p - 1.0) / ((p - 2.0) * (p - 3.0) * big_r.powf(p - 3.0))
}

/// Smallest power-of-two multiple of 1 with contraction bound below `1/4`.
pub fn default_tail_radius(p: f64) -> f64 {
    let mut r = 1.0;
    while contraction_bound(p, r) >= 0.25 && r < 1e12 {
        r *= 2.0;
    }
    r
}

pub fn tail_fixed_point(p: f64, big_r: f64, tol: f64) -> Result<TailProfile, SolitonError> {
    tail_fixed_point_with(p, big_r, tol, TailOptions::default())
}

/// Iterate `φ ↦ L(φ)`, `L(φ)(r) = -∫_r^∞ (t - r) F(1 + φ(t)) t^{1-p} dt`,
/// from `φ = 0` until the sup-change drops below `tol`.
///
/// The integrals are fourth-order cumulative sums in `ln r`; beyond the grid
/// the integrand is replaced by its expansion to first order in `φ`, with
/// `φ` continued by its `r^{3-p}` envelope.
pub fn tail_fixed_point_with(p: f64, big_r: f64, tol: f64, opts: TailOptions) -> Result<TailProfile, SolitonError> {
    if !(p > 3.0 && p <= 5.0) {
        return Err(SolitonError::Exponent { p, range: "3 < p <= 5" });
    }
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(SolitonError::Radius(big_r));
    }
    let bound = contraction_bound(p, big_r);
    if bound >= 0.5 {
        return Err(SolitonError::WeakContraction { bound, r: big_r, suggested: default_tail_radius(p) });
    }
    let decades = (opts.min_decades as f64).max((1e6 / big_r).log10().ceil()) as usize;
    let n = decades * opts.per_decade + 1;
    let r_far = big_r * 10f64.powi(decades as i32);
    let grid = Arc::new(RadialGrid::new(big_r, r_far, n, Spacing::Geometric)?);
    let dxi = grid.log_step().unwrap();
    let r = grid.radii().to_vec();

    let mut phi: Vec<f64> = vec![0.0; n];
    let mut dphi = vec![0.0; n];
    let mut prev_change = f64::NAN;
    let mut factor: f64 = 0.0;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    let mut truncation_error = 0.0;
    let (mut ia, mut ib) = (vec![0.0; n], vec![0.0; n]);
    while change >= tol {
        if iterations >= opts.max_iterations {
            return Err(SolitonError::NotConverged { iterations, change });
        }
        // Integrands stored from the outer end so that the running sums are
        // tail integrals, free of cancellation far out.
        for i in 0..n {
            let f = (1.0 + phi[i]).abs().powf(p - 1.0) * (1.0 + phi[i]);
            ia[n - 1 - i] = f * r[i].powf(3.0 - p);
            ib[n - 1 - i] = f * r[i].powf(2.0 - p);
        }
        let ca = cumulative_uniform(&ia, dxi, Parity::None);
        let cb = cumulative_uniform(&ib, dxi, Parity::None);
        let pm = phi[n - 1];
        let a_tail = r_far.powf(3.0 - p) * (1.0 / (p - 3.0) + p * pm / (2.0 * p - 6.0));
        let b_tail = r_far.powf(2.0 - p) * (1.0 / (p - 2.0) + p * pm / (2.0 * p - 5.0));
        let quad = 0.5 * p * (p - 1.0) * pm * pm;
        truncation_error = quad * r_far.powf(3.0 - p) * (1.0 / (3.0 * p - 9.0) + 1.0 / (3.0 * p - 8.0));
        change = 0.0;
        for i in 0..n {
            let a = ca[n - 1 - i] + a_tail;
            let b = cb[n - 1 - i] + b_tail;
            let next = -(a - r[i] * b);
            change = f64::max(change, (next - phi[i]).abs());
            phi[i] = next;
            dphi[i] = b;
        }
        if prev_change.is_finite() && prev_change > 0.0 && change > tol {
            factor = factor.max(change / prev_change);
        }
        prev_change = change;
        iterations += 1;
    }
    let m = first_iterate_size(p, big_r);
    let sup = phi.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if sup > 2.0 * m * (1.0 + 1e-9) {
        return Err(SolitonError::WeakContraction { bound, r: big_r, suggested: default_tail_radius(p) });
    }
    let envelope_c = phi.iter().zip(&r).map(|(v, x)| v.abs() * x.powf(p - 3.0)).fold(0.0, f64::max);
    let nz: Vec<(f64, f64)> = phi.iter().zip(&r).filter(|(v, _)| v.abs() > 0.0).map(|(v, x)| (x.ln(), v.abs().ln())).collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = nz.into_iter().unzip();
    let envelope_slope = if lx.len() > 2 { fit_slope(&lx, &ly) } else { f64::NAN };
    Ok(TailProfile {
        p,
        r: big_r,
        grid,
        phi,
        dphi,
        iterations,
        contraction_factor: factor,
        contraction_bound: bound,
        final_change: change,
        truncation_error,
        envelope_c,
        envelope_slope,
    })
}

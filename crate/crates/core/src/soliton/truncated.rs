use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::NormKind;
use crate::numerics::{cumulative_uniform, fit_slope, Parity};

use super::{SolitonError, SolitonProfile};

/// `V_R(x, t) = W(R + |t|)` for `|x| <= R + |t|` and `W(|x|)` beyond.
#[derive(Debug, Clone)]
pub struct TruncatedSoliton {
    pub profile: Arc<SolitonProfile>,
    pub r: f64,
    /// `lim |x| W(|x|)`, read off at the outer end of the profile.
    amplitude: f64,
}

/// Norms of one `V_R` over a symmetric time window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VrNorms {
    #[serde(rename = "R")]
    pub r: f64,
    /// Half-width of the window, `None` for all time.
    pub window: Option<f64>,
    /// `‖V_R‖_{Y_{s_p}}`.
    pub y_norm: f64,
    /// `‖V_R‖_{L^{2p/(p-3)} L^{2p}}`.
    pub companion_norm: f64,
}

/// Log-log fit of the `V_R` norms over an `R` sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub p: f64,
    pub rows: Vec<VrNorms>,
    pub y_slope: f64,
    /// `1/2 - s_p`.
    pub y_expected: f64,
    pub companion_slope: f64,
    pub companion_expected: f64,
}

impl ScalingFit {
    pub fn within(&self, tol: f64) -> bool {
        (self.y_slope - self.y_expected).abs() <= tol && (self.companion_slope - self.companion_expected).abs() <= tol
    }
}

pub fn truncated_soliton(s: Arc<SolitonProfile>, r: f64) -> Result<TruncatedSoliton, SolitonError> {
    let r_min = s.grid.r_min();
    if !(r >= r_min) || !r.is_finite() {
        return Err(SolitonError::BelowProfile { r, r_min });
    }
    let n = s.y.len();
    let amplitude = s.radii()[n - 1] * s.y[n - 1];
    Ok(TruncatedSoliton { profile: s, r, amplitude })
}

impl TruncatedSoliton {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let a = self.r + t.abs();
        self.profile.eval(x.abs().max(a))
    }

    /// `‖V_R(t)‖_{L^e}^e` as a function of `a = R + |t|` at every grid node
    /// `a >= R`, plus the constant `K` with `‖V_R(t)‖_{L^e}^e = K a^{3-e}`
    /// beyond the grid.
    fn slice_powers(&self, e: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let g = &self.profile.grid;
        let r = g.radii();
        let h = g.log_step().expect("soliton profiles live on geometric grids");
        let n = r.len();
        // Accumulated from the outer end: near the origin the integrand can
        // be many orders larger than the tail it would be subtracted from.
        let integrand: Vec<f64> = r.iter().zip(&self.profile.y).rev().map(|(x, y)| x.powi(3) * y.abs().powf(e)).collect();
        let c = cumulative_uniform(&integrand, h, Parity::None);
        let rmax = r[n - 1];
        let far = self.amplitude.abs().powf(e) * rmax.powf(3.0 - e) / (e - 3.0);
        let k = 4.0 * PI * self.amplitude.abs().powf(e) * (1.0 / 3.0 + 1.0 / (e - 3.0));
        let mut a = Vec::new();
        let mut v = Vec::new();
        for i in 0..n {
            if r[i] < self.r * (1.0 - 1e-12) {
                continue;
            }
            let inner = self.profile.y[i].abs().powf(e) * r[i].powi(3) / 3.0;
            a.push(r[i]);
            v.push(4.0 * PI * (inner + c[n - 1 - i] + far));
        }
        (a, v, k)
    }

    /// `‖V_R‖_{L^q_t L^r_x}` over `|t| <= window` (all time for `None`).
    /// Requires `r > 3` so the spatial norm of the `1/|x|` tail is finite.
    pub fn spacetime_norm(&self, q: f64, e: f64, window: Option<f64>) -> f64 {
        let (a, v, k) = self.slice_powers(e);
        let g = &self.profile.grid;
        let rmax = g.r_max();
        let big_r = self.r;
        let a_end = window.map_or(f64::INFINITY, |w| big_r + w);
        let slice = |x: f64| -> f64 {
            if x >= rmax {
                k * x.powf(3.0 - e)
            } else {
                // Interpolate the node values in ln a.
                let j = a.partition_point(|&y| y <= x).clamp(1, a.len() - 1);
                let (x0, x1) = (a[j - 1].ln(), a[j].ln());
                let w = ((x.ln() - x0) / (x1 - x0)).clamp(0.0, 1.0);
                if v[j - 1] > 0.0 && v[j] > 0.0 {
                    (v[j - 1].ln() * (1.0 - w) + v[j].ln() * w).exp()
                } else {
                    v[j - 1] * (1.0 - w) + v[j] * w
                }
            }
        };
        if v.iter().all(|x| *x == 0.0) && k == 0.0 {
            return 0.0;
        }
        let beta = (3.0 - e) * q / e;
        let mut total = 0.0;
        // Inside the grid: Simpson in ln a, sixteen panels per grid cell.
        let upper = a_end.min(rmax);
        if big_r < upper {
            let f = |x: f64| slice(x).powf(q / e) * x;
            let n = 16 * ((upper / big_r).ln() / g.log_step().unwrap()).ceil().max(1.0) as usize;
            let n = n + n % 2;
            let (l0, l1) = (big_r.ln(), upper.ln());
            let h = (l1 - l0) / n as f64;
            let mut acc = f(big_r) + f(upper);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f((l0 + i as f64 * h).exp());
            }
            total += acc * h / 3.0;
        }
        if a_end > rmax {
            let kq = k.powf(q / e);
            let lo = big_r.max(rmax);
            total += if a_end.is_finite() {
                kq * (a_end.powf(beta + 1.0) - lo.powf(beta + 1.0)) / (beta + 1.0)
            } else {
                kq * lo.powf(beta + 1.0) / (-beta - 1.0)
            };
        }
        (2.0 * total).powf(1.0 / q)
    }

    pub fn norms(&self, window: Option<f64>) -> Result<VrNorms, SolitonError> {
        let p = self.profile.p;
        let sp = 1.5 - 2.0 / (p - 1.0);
        let (yq, yr) = NormKind::Y { s: sp }.exponents(p).map_err(|_| SolitonError::Exponent { p, range: "3 < p <= 5" })?;
        let cq = 2.0 * p / (p - 3.0);
        Ok(VrNorms {
            r: self.r,
            window,
            y_norm: self.spacetime_norm(yq, yr, window),
            companion_norm: self.spacetime_norm(cq, 2.0 * p, window),
        })
    }
}

/// Norms of `V_R` for each radius and their log-log slopes against `R`.
pub fn v_r_scaling(s: Arc<SolitonProfile>, radii: &[f64], window: Option<f64>) -> Result<ScalingFit, SolitonError> {
    let p = s.p;
    let rows = radii
        .iter()
        .map(|&r| truncated_soliton(s.clone(), r)?.norms(window))
        .collect::<Result<Vec<_>, _>>()?;
    let lr: Vec<f64> = rows.iter().map(|x| x.r.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|x| x.y_norm.ln()).collect();
    let lc: Vec<f64> = rows.iter().map(|x| x.companion_norm.ln()).collect();
    Ok(ScalingFit {
        p,
        y_slope: fit_slope(&lr, &ly),
        y_expected: 0.5 - (1.5 - 2.0 / (p - 1.0)),
        companion_slope: fit_slope(&lr, &lc),
        companion_expected: -0.5,
        rows,
    })
}

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldPair, ReducedPair};
use crate::grid::{RadialGrid, Spacing};
use crate::numerics::{self, Parity};

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("free propagation needs a uniform grid starting at r = 0")]
    UnsupportedGrid,
    #[error("data supported up to r = {support_end} leave the grid (r_max = {r_max}) within |t| = {t}")]
    Truncated { support_end: f64, t: f64, r_max: f64 },
    #[error("data are not compactly supported inside the grid")]
    NotCompact,
    #[error("radius window [{a}, {b}] leaves the grid")]
    OutsideGrid { a: f64, b: f64 },
}

/// `z₁ = w_t - w_r` (outgoing) and `z₂ = w_t + w_r` (incoming).
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFields {
    pub grid: Arc<RadialGrid>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
}

impl CharacteristicFields {
    /// `(w_t, w_r)` recovered from `z₁, z₂`.
    pub fn recombine(&self) -> (Vec<f64>, Vec<f64>) {
        let wt = self.z1.iter().zip(&self.z2).map(|(a, b)| 0.5 * (a + b)).collect();
        let wr = self.z1.iter().zip(&self.z2).map(|(a, b)| 0.5 * (b - a)).collect();
        (wt, wr)
    }
}

/// Samples on the whole-line lattice `x_j = (j - m) h`, `j = 0..=2m`,
/// with a fixed value beyond both ends.
#[derive(Debug, Clone)]
struct LineSamples {
    values: Vec<f64>,
    half: f64,
    h: f64,
    outside: f64,
}

impl LineSamples {
    fn at(&self, x: f64) -> f64 {
        if x.abs() > self.half * (1.0 + 1e-14) {
            return self.outside;
        }
        numerics::interp_uniform(&self.values, -self.half, self.h, x.clamp(-self.half, self.half))
            .unwrap_or(self.outside)
    }

    fn derivative_at(&self, x: f64) -> f64 {
        if x.abs() > self.half * (1.0 + 1e-14) {
            return 0.0;
        }
        numerics::interp_uniform_derivative(&self.values, -self.half, self.h, x.clamp(-self.half, self.half))
            .unwrap_or(0.0)
    }
}

/// Mirror samples on `[0, r_max]` to the whole line with the given parity.
fn mirror(half_line: &[f64], parity: Parity) -> Vec<f64> {
    let m = half_line.len() - 1;
    let sign = if parity == Parity::Odd { -1.0 } else { 1.0 };
    let mut out = Vec::with_capacity(2 * m + 1);
    for j in (1..=m).rev() {
        out.push(sign * half_line[j]);
    }
    out.extend_from_slice(half_line);
    if parity == Parity::Odd {
        out[m] = 0.0;
    }
    out
}

/// The free wave generated by a data pair, ready to be evaluated at any time.
#[derive(Debug, Clone)]
pub struct FreeWave {
    grid: Arc<RadialGrid>,
    w0: LineSamples,
    /// Even antiderivative of the odd extension of `w₁`.
    big_w1: LineSamples,
    f: LineSamples,
    g: LineSamples,
    support_end: f64,
}

impl FreeWave {
    pub fn new(data: &FieldPair) -> Result<Self, LinearError> {
        let grid = data.grid.clone();
        if grid.spacing() != Spacing::Uniform || !grid.starts_at_origin() || grid.len() < 5 {
            return Err(LinearError::UnsupportedGrid);
        }
        let h = grid.step().unwrap();
        let half = grid.r_max();
        let red = data.to_reduced();
        let w0p = numerics::derivative_uniform(&red.w, h, Parity::Odd);
        let big_w1 = numerics::cumulative_uniform(&red.wt, h, Parity::Odd);
        let f: Vec<f64> = w0p.iter().zip(&red.wt).map(|(a, b)| a + b).collect();
        let g: Vec<f64> = w0p.iter().zip(&red.wt).map(|(a, b)| a - b).collect();
        // F and G on the whole line: w̃₀' is even, w̃₁ is odd, so G(-x) = F(x)
        let m = grid.len() - 1;
        let mut f_line = Vec::with_capacity(2 * m + 1);
        for j in (1..=m).rev() {
            f_line.push(g[j]);
        }
        f_line.extend_from_slice(&f);
        let mut g_line = Vec::with_capacity(2 * m + 1);
        for j in (1..=m).rev() {
            g_line.push(f[j]);
        }
        g_line.extend_from_slice(&g);

        let scale = data.u.iter().chain(&data.ut).fold(0.0f64, |a, v| a.max(v.abs()));
        let r = grid.radii();
        let support_end = (0..r.len())
            .rev()
            .find(|&i| data.u[i].abs() > 1e-12 * scale || data.ut[i].abs() > 1e-12 * scale)
            .map(|i| r[i])
            .unwrap_or(0.0);
        let line = |values: Vec<f64>, outside: f64| LineSamples { values, half, h, outside };
        let w1_end = *big_w1.last().unwrap();
        Ok(Self {
            w0: line(mirror(&red.w, Parity::Odd), 0.0),
            big_w1: line(mirror(&big_w1, Parity::Even), w1_end),
            f: line(f_line, 0.0),
            g: line(g_line, 0.0),
            grid,
            support_end,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Largest radius where the data exceed `1e-12` of their peak.
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    fn check_time(&self, t: f64) -> Result<(), LinearError> {
        let r_max = self.grid.r_max();
        if self.support_end + t.abs() > r_max * (1.0 + 1e-12) {
            return Err(LinearError::Truncated { support_end: self.support_end, t, r_max });
        }
        Ok(())
    }

    /// `F(x)`, i.e. `w_t + w_r` transported along `r + t = x`.
    pub fn big_f(&self, x: f64) -> f64 {
        self.f.at(x)
    }

    /// `G(x)`, i.e. `w_r - w_t` transported along `r - t = x`.
    pub fn big_g(&self, x: f64) -> f64 {
        self.g.at(x)
    }

    pub fn w(&self, r: f64, t: f64) -> f64 {
        0.5 * (self.w0.at(r + t) + self.w0.at(r - t)) + 0.5 * (self.big_w1.at(r + t) - self.big_w1.at(r - t))
    }

    pub fn w_t(&self, r: f64, t: f64) -> f64 {
        0.5 * (self.f.at(r + t) - self.g.at(r - t))
    }

    pub fn w_r(&self, r: f64, t: f64) -> f64 {
        0.5 * (self.f.at(r + t) + self.g.at(r - t))
    }

    /// `u(r, t)`; at the origin `u = ∂_r w = F(t)`.
    pub fn u(&self, r: f64, t: f64) -> f64 {
        if r == 0.0 {
            self.f.at(t)
        } else {
            self.w(r, t) / r
        }
    }

    pub fn u_t(&self, r: f64, t: f64) -> f64 {
        if r == 0.0 {
            self.f.derivative_at(t)
        } else {
            self.w_t(r, t) / r
        }
    }

    /// State at time `t`, refusing times at which the wave would reach `r_max`.
    pub fn at(&self, t: f64) -> Result<FieldPair, LinearError> {
        self.check_time(t)?;
        Ok(self.at_unchecked(t))
    }

    /// State at time `t`; anything leaving the grid is simply lost.
    pub fn at_unchecked(&self, t: f64) -> FieldPair {
        let u = self.grid.radii().iter().map(|&r| self.u(r, t)).collect();
        let ut = self.grid.radii().iter().map(|&r| self.u_t(r, t)).collect();
        FieldPair { grid: self.grid.clone(), u, ut }
    }

    pub fn reduced_at(&self, t: f64) -> Result<ReducedPair, LinearError> {
        self.check_time(t)?;
        let w = self.grid.radii().iter().map(|&r| self.w(r, t)).collect();
        let wt = self.grid.radii().iter().map(|&r| self.w_t(r, t)).collect();
        Ok(ReducedPair { grid: self.grid.clone(), w, wt })
    }

    pub fn characteristics(&self, t: f64) -> CharacteristicFields {
        let r = self.grid.radii();
        CharacteristicFields {
            grid: self.grid.clone(),
            z1: r.iter().map(|&x| -self.g.at(x - t)).collect(),
            z2: r.iter().map(|&x| self.f.at(x + t)).collect(),
        }
    }

    /// `∫_a^{r_max} (w_r² + w_t²) dr = ½ ∫ (z₁² + z₂²) dr` at time `t`.
    pub fn energy_1d(&self, a: f64, t: f64) -> f64 {
        let z = self.characteristics(t);
        let dens: Vec<f64> = z.z1.iter().zip(&z.z2).map(|(p, q)| 0.5 * (p * p + q * q)).collect();
        if a <= 0.0 {
            // the density is even in r, so the trapezoid rule is spectrally accurate
            let h = self.grid.step().unwrap();
            let n = dens.len();
            dens.iter().enumerate().map(|(i, d)| if i == 0 || i == n - 1 { 0.5 * h * d } else { h * d }).sum()
        } else {
            self.grid.integrate_range(&dens, a, self.grid.r_max())
        }
    }

    /// Three-dimensional energy on `a < r < r_max` at time `t`, evaluated
    /// through the `u`/`w` ring identity with the exact d'Alembert
    /// derivatives.
    pub fn exterior_energy(&self, a: f64, t: f64) -> f64 {
        let b = self.grid.r_max();
        let ua = self.u(a, t);
        let ub = self.u(b, t);
        (4.0 * std::f64::consts::PI * (self.energy_1d(a, t) + a * ua * ua - b * ub * ub)).max(0.0)
    }
}

/// `S(t)(u₀, u₁)`.
pub fn free_propagate(f: &FieldPair, t: f64) -> Result<FieldPair, LinearError> {
    FreeWave::new(f)?.at(t)
}

/// Closed radial interval carrying the measured support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

/// Nodes where `|u|` or `|u_t|` exceed `rel` times their maximum.
pub(crate) fn measured_support(f: &FieldPair, rel: f64) -> Option<Support> {
    let scale = f.u.iter().chain(&f.ut).fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let r = f.radii();
    let hot: Vec<usize> = (0..r.len())
        .filter(|&i| f.u[i].abs() > rel * scale || f.ut[i].abs() > rel * scale)
        .collect();
    Some(Support { lo: r[*hot.first()?], hi: r[*hot.last()?] })
}

/// Support of `S(t) f` for data supported in an annulus.
///
/// Returns `None` for identically zero data. Data still above `1e-12` of
/// their peak at `r_max` are rejected.
pub fn huygens_support(f: &FieldPair, t: f64) -> Result<Option<Support>, LinearError> {
    let Some(initial) = measured_support(f, 1e-12) else {
        return Ok(None);
    };
    if initial.hi >= f.grid.r_max() {
        return Err(LinearError::NotCompact);
    }
    let moved = free_propagate(f, t)?;
    Ok(measured_support(&moved, 1e-10))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(r: f64, a: f64, b: f64) -> f64 {
        let x = (2.0 * r - a - b) / (b - a);
        if x.abs() < 1.0 {
            (-1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    }

    fn grid(r_max: f64, h: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform_from_origin(r_max, h).unwrap())
    }

    #[test]
    fn time_zero_is_identity() {
        let g = grid(8.0, 1.0 / 64.0);
        let f = FieldPair::from_fn(g, |r| bump(r, 0.0 - 2.0, 2.0) + 0.3 * bump(r, 1.0, 3.0), |r| bump(r, 0.5, 2.5));
        let back = free_propagate(&f, 0.0).unwrap();
        for i in 1..f.u.len() {
            assert!((back.u[i] - f.u[i]).abs() < 1e-13);
            assert!((back.ut[i] - f.ut[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn outgoing_bump_matches_formula() {
        // w₀ = bump on [1,2], w₁ = 0: at t = 10 the outgoing half sits on [11,12]
        let g = grid(16.0, 1.0 / 128.0);
        let f = FieldPair::from_fn(g.clone(), |r| if r > 0.0 { bump(r, 1.0, 2.0) / r } else { 0.0 }, |_| 0.0);
        let wave = FreeWave::new(&f).unwrap();
        let red = wave.reduced_at(10.0).unwrap();
        for (&r, &w) in g.radii().iter().zip(&red.w) {
            let want = 0.5 * (bump(r - 10.0, 1.0, 2.0) - bump(10.0 - r, 1.0, 2.0));
            assert!((w - want).abs() < 1e-14, "r = {r}");
        }
    }

    #[test]
    fn truncation_is_reported() {
        let g = grid(4.0, 1.0 / 64.0);
        let f = FieldPair::from_fn(g, |r| bump(r, 1.0, 2.0), |_| 0.0);
        assert!(matches!(free_propagate(&f, 2.5), Err(LinearError::Truncated { .. })));
        assert!(free_propagate(&f, 1.9).is_ok());
    }

    #[test]
    fn characteristic_recombination() {
        let g = grid(6.0, 1.0 / 64.0);
        let f = FieldPair::from_fn(g, |r| (-r * r).exp(), |r| r * (-r * r).exp());
        let wave = FreeWave::new(&f).unwrap();
        let z = wave.characteristics(0.75);
        let (wt, wr) = z.recombine();
        for (i, &r) in wave.grid().radii().iter().enumerate() {
            assert!((wt[i] - wave.w_t(r, 0.75)).abs() < 1e-15);
            assert!((wr[i] - wave.w_r(r, 0.75)).abs() < 1e-15);
        }
    }
}

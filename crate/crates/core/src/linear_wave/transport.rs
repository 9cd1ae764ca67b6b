use serde::{Deserialize, Serialize};

use crate::numerics::gauss_legendre;

use super::{FreeWave, LinearError, SpaceTimeSource};

/// Anything that can report `w_t` and `w_r` at arbitrary `(r, t)`.
pub trait ReducedHistory {
    fn w_t(&self, r: f64, t: f64) -> f64;
    fn w_r(&self, r: f64, t: f64) -> f64;
    /// Largest radius where values are available.
    fn r_max(&self) -> f64;
    /// Time span covered.
    fn time_span(&self) -> (f64, f64);

    fn z1(&self, r: f64, t: f64) -> f64 {
        self.w_t(r, t) - self.w_r(r, t)
    }
    fn z2(&self, r: f64, t: f64) -> f64 {
        self.w_t(r, t) + self.w_r(r, t)
    }
}

impl ReducedHistory for FreeWave {
    fn w_t(&self, r: f64, t: f64) -> f64 {
        FreeWave::w_t(self, r, t)
    }
    fn w_r(&self, r: f64, t: f64) -> f64 {
        FreeWave::w_r(self, r, t)
    }
    fn r_max(&self) -> f64 {
        self.grid().r_max()
    }
    fn time_span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// A history given by closed-form `w_t` and `w_r`.
pub struct AnalyticHistory<A, B> {
    pub w_t: A,
    pub w_r: B,
    pub r_max: f64,
}

impl<A: Fn(f64, f64) -> f64, B: Fn(f64, f64) -> f64> ReducedHistory for AnalyticHistory<A, B> {
    fn w_t(&self, r: f64, t: f64) -> f64 {
        (self.w_t)(r, t)
    }
    fn w_r(&self, r: f64, t: f64) -> f64 {
        (self.w_r)(r, t)
    }
    fn r_max(&self) -> f64 {
        self.r_max
    }
    fn time_span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Z1,
    Z2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    /// Window norm at the later time for `z₁` (earlier for `z₂`), shifted by `M`.
    pub moved: f64,
    /// Window norm on `[r₀, 4r₀]` at `t₀`.
    pub start: f64,
    /// `(∫ (∫₀^M h dt)² dr)^{1/2}` along the characteristics.
    pub bound: f64,
    /// `|moved - start| - bound`; nonpositive when the estimate holds.
    pub residual: f64,
}

const PANELS: usize = 64;

/// Compare `L²` norms of a characteristic field on `[r₀, 4r₀]` at `t₀` and
/// on `[r₀+M, 4r₀+M]` at `t₀ ± M` (`+` for `z₁`, `-` for `z₂`), against the
/// source accumulated along the connecting characteristics.
pub fn transport_residual(
    hist: &dyn ReducedHistory,
    h: &dyn SpaceTimeSource,
    r0: f64,
    t0: f64,
    m: f64,
    which: Which,
) -> Result<TransportReport, LinearError> {
    let (a, b) = (r0, 4.0 * r0);
    if r0 <= 0.0 || b + m > hist.r_max() * (1.0 + 1e-12) {
        return Err(LinearError::OutsideGrid { a, b: b + m });
    }
    let (lo, hi) = hist.time_span();
    let t1 = match which {
        Which::Z1 => t0 + m,
        Which::Z2 => t0 - m,
    };
    if t0.min(t1) < lo - 1e-12 || t0.max(t1) > hi + 1e-12 {
        return Err(LinearError::OutsideGrid { a, b: b + m });
    }
    let z = |r: f64, t: f64| match which {
        Which::Z1 => hist.z1(r, t),
        Which::Z2 => hist.z2(r, t),
    };
    let moved = gauss_legendre(|r| z(r, t1).powi(2), a + m, b + m, PANELS).sqrt();
    let start = gauss_legendre(|r| z(r, t0).powi(2), a, b, PANELS).sqrt();
    let dir = if which == Which::Z1 { 1.0 } else { -1.0 };
    let inner = |r: f64| gauss_legendre(|s| h.eval(r + s, t0 + dir * s), 0.0, m, PANELS);
    let bound = gauss_legendre(|r| inner(r).powi(2), a, b, PANELS).sqrt();
    Ok(TransportReport { moved, start, bound, residual: (moved - start).abs() - bound })
}

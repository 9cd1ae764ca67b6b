//! Radial sample lattices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    Geometric,
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid span is not positive: r_min = {r_min}, r_max = {r_max}")]
    NonpositiveSpan { r_min: f64, r_max: f64 },
    #[error("grid needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("geometric spacing needs r_min > 0")]
    GeometricAtOrigin,
}

/// A strictly increasing set of radii. Only the four defining parameters are
/// serialized; the radii themselves are recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    spacing: Spacing,
    radii: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridSpec {
    r_min: f64,
    r_max: f64,
    n: usize,
    spacing: Spacing,
}

impl TryFrom<GridSpec> for RadialGrid {
    type Error = GridError;
    fn try_from(s: GridSpec) -> Result<Self, GridError> {
        RadialGrid::new(s.r_min, s.r_max, s.n, s.spacing)
    }
}

impl From<RadialGrid> for GridSpec {
    fn from(g: RadialGrid) -> Self {
        GridSpec { r_min: g.r_min, r_max: g.r_max, n: g.len(), spacing: g.spacing }
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.r_min == other.r_min
            && self.r_max == other.r_max
            && self.spacing == other.spacing
            && self.radii.len() == other.radii.len()
    }
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n: usize, spacing: Spacing) -> Result<Self, GridError> {
        if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(GridError::NonpositiveSpan { r_min, r_max });
        }
        if n < 2 {
            return Err(GridError::TooFewSamples(n));
        }
        let last = (n - 1) as f64;
        let radii: Vec<f64> = match spacing {
            Spacing::Uniform => {
                let h = (r_max - r_min) / last;
                (0..n).map(|i| if i == n - 1 { r_max } else { r_min + i as f64 * h }).collect()
            }
            Spacing::Geometric => {
                if r_min <= 0.0 {
                    return Err(GridError::GeometricAtOrigin);
                }
                let ratio = r_max / r_min;
                (0..n)
                    .map(|i| match i {
                        0 => r_min,
                        _ if i == n - 1 => r_max,
                        _ => r_min * ratio.powf(i as f64 / last),
                    })
                    .collect()
            }
        };
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GridError::NonpositiveSpan { r_min, r_max });
        }
        Ok(Self { r_min, r_max, spacing, radii })
    }

    /// Uniform grid from the origin with step `h`; `r_max` is rounded up to a node.
    pub fn uniform_from_origin(r_max: f64, h: f64) -> Result<Self, GridError> {
        let cells = (r_max / h - 1e-9).ceil().max(1.0) as usize;
        Self::new(0.0, cells as f64 * h, cells + 1, Spacing::Uniform)
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn len(&self) -> usize {
        self.radii.len()
    }
    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
    pub fn spacing(&self) -> Spacing {
        self.spacing
    }
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Constant step for uniform grids, `None` for geometric ones.
    pub fn step(&self) -> Option<f64> {
        match self.spacing {
            Spacing::Uniform => Some((self.r_max - self.r_min) / (self.len() - 1) as f64),
            Spacing::Geometric => None,
        }
    }

    /// Step in `ln r` for geometric grids.
    pub fn log_step(&self) -> Option<f64> {
        match self.spacing {
            Spacing::Geometric => Some((self.r_max / self.r_min).ln() / (self.len() - 1) as f64),
            Spacing::Uniform => None,
        }
    }

    pub fn starts_at_origin(&self) -> bool {
        self.r_min == 0.0
    }

    /// Index of the last node with radius `<= r` (clamped into range).
    pub fn locate(&self, r: f64) -> usize {
        match self.radii.partition_point(|&x| x <= r) {
            0 => 0,
            k => (k - 1).min(self.len() - 1),
        }
    }

    /// Radial derivative of samples, fourth order.
    pub fn derivative(&self, values: &[f64], parity: Parity) -> Vec<f64> {
        match self.spacing {
            Spacing::Uniform => {
                let parity = if self.starts_at_origin() { parity } else { Parity::None };
                numerics::derivative_uniform(values, self.step().unwrap(), parity)
            }
            Spacing::Geometric => {
                let d = numerics::derivative_uniform(values, self.log_step().unwrap(), Parity::None);
                d.iter().zip(&self.radii).map(|(v, r)| v / r).collect()
            }
        }
    }

    /// Quadrature weights for `\int f(r) dr` over the whole grid.
    pub fn weights(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Uniform => numerics::simpson_weights(self.len(), self.step().unwrap()),
            Spacing::Geometric => {
                let dxi = self.log_step().unwrap();
                let n = self.len();
                self.radii
                    .iter()
                    .enumerate()
                    .map(|(i, r)| if i == 0 || i == n - 1 { 0.5 * dxi * r } else { dxi * r })
                    .collect()
            }
        }
    }

    /// `\int f dr` over the whole grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Interpolated value at an arbitrary radius inside the grid.
    pub fn interpolate(&self, values: &[f64], r: f64) -> Option<f64> {
        match self.spacing {
            Spacing::Uniform => numerics::interp_uniform(values, self.r_min, self.step().unwrap(), r),
            Spacing::Geometric => {
                if r <= 0.0 {
                    return None;
                }
                numerics::interp_uniform(values, self.r_min.ln(), self.log_step().unwrap(), r.ln())
            }
        }
    }

    /// `\int_a^b f dr` for arbitrary `a < b` inside the grid.
    ///
    /// Whole cells use the grid rule; partial cells at either end are
    /// integrated with Gauss-Legendre on the local cubic interpolant.
    pub fn integrate_range(&self, values: &[f64], a: f64, b: f64) -> f64 {
        let r = &self.radii;
        let tol = 1e-12 * (self.r_max - self.r_min).max(1.0);
        let a = a.max(self.r_min);
        let b = b.min(self.r_max);
        if b <= a {
            return 0.0;
        }
        let interp = |x: f64| self.interpolate(values, x).unwrap_or(0.0);
        let mut lo = r.partition_point(|&x| x < a - tol);
        let mut hi = r.partition_point(|&x| x <= b + tol).saturating_sub(1);
        if hi < lo || lo >= r.len() || r[lo] > b {
            return numerics::gauss_legendre(interp, a, b, 2);
        }
        lo = lo.min(r.len() - 1);
        hi = hi.max(lo);
        let left = if r[lo] > a { numerics::gauss_legendre(interp, a, r[lo], 1) } else { 0.0 };
        let right = if r[hi] < b { numerics::gauss_legendre(interp, r[hi], b, 1) } else { 0.0 };
        let mid = if hi > lo {
            match self.spacing {
                Spacing::Uniform => numerics::simpson(&values[lo..=hi], self.step().unwrap()),
                Spacing::Geometric => {
                    let dxi = self.log_step().unwrap();
                    let g: Vec<f64> = (lo..=hi).map(|i| values[i] * r[i]).collect();
                    numerics::simpson(&g, dxi)
                }
            }
        } else {
            0.0
        };
        left + mid + right
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_step() {
        let g = RadialGrid::new(0.0, 1.0, 2, Spacing::Uniform).unwrap();
        assert_eq!(g.radii(), &[0.0, 1.0]);
        let g = RadialGrid::new(0.0, 10.0, 101, Spacing::Uniform).unwrap();
        assert!((g.step().unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn geometric_decades() {
        let g = RadialGrid::new(1e-3, 1e2, 6, Spacing::Geometric).unwrap();
        // independent oracle: powers of ten
        for (i, r) in g.radii().iter().enumerate() {
            let want = 10f64.powi(i as i32 - 3);
            assert!((r / want - 1.0).abs() < 1e-13, "{r} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(RadialGrid::new(1.0, 1.0, 5, Spacing::Uniform), Err(GridError::NonpositiveSpan { .. })));
        assert_eq!(RadialGrid::new(0.0, 1.0, 1, Spacing::Uniform), Err(GridError::TooFewSamples(1)));
        assert_eq!(RadialGrid::new(0.0, 1.0, 8, Spacing::Geometric), Err(GridError::GeometricAtOrigin));
    }

    #[test]
    fn serde_round_trip_keeps_parameters_only() {
        let g = RadialGrid::new(0.5, 3.0, 11, Spacing::Geometric).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"n\":11") && s.contains("geometric"));
        let back: RadialGrid = serde_json::from_str(&s).unwrap();
        assert_eq!(back.radii(), g.radii());
    }

    #[test]
    fn integrate_range_on_partial_cells() {
        let g = RadialGrid::new(0.0, 4.0, 401, Spacing::Uniform).unwrap();
        let v: Vec<f64> = g.radii().iter().map(|r| r.cos()).collect();
        let got = g.integrate_range(&v, 0.1234, 3.3333);
        assert!((got - (3.3333f64.sin() - 0.1234f64.sin())).abs() < 1e-10);
        let gg = RadialGrid::new(0.1, 4.0, 801, Spacing::Geometric).unwrap();
        let v: Vec<f64> = gg.radii().iter().map(|r| r.cos()).collect();
        let got = gg.integrate_range(&v, 0.1234, 3.3333);
        assert!((got - (3.3333f64.sin() - 0.1234f64.sin())).abs() < 1e-8, "{got}");
    }
}

//! Field snapshots `(u, u_t)` on a radial grid, the `w = r u` view, the
//! center cutoff and ring energies.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, RadialGrid, Spacing};
use crate::numerics::Parity;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("cannot divide by r = 0 without an origin rule")]
    OriginDivision,
    #[error("radius {r} outside grid [{r_min}, {r_max}]")]
    OutOfRange { r: f64, r_min: f64, r_max: f64 },
    #[error("degenerate interval [{a}, {b}]")]
    DegenerateInterval { a: f64, b: f64 },
    #[error("inner radius must be positive for the boundary term")]
    SingularBoundary,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// A snapshot `(u(r), u_t(r))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldPair {
    pub grid: Arc<RadialGrid>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

/// The `w = r u` view of a [`FieldPair`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPair {
    pub grid: Arc<RadialGrid>,
    pub w: Vec<f64>,
    pub wt: Vec<f64>,
}

/// How to recover `u(0)` from `w` when the grid touches the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginRule {
    Forbid,
    /// `u(0) = w'(0)`, valid when `w` is smooth and odd.
    Derivative,
}

fn check(values: &[f64], n: usize) -> Result<(), FieldError> {
    if values.len() != n {
        return Err(FieldError::LengthMismatch { expected: n, got: values.len() });
    }
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(FieldError::NonFinite(i)),
        None => Ok(()),
    }
}

impl FieldPair {
    pub fn new(grid: Arc<RadialGrid>, u: Vec<f64>, ut: Vec<f64>) -> Result<Self, FieldError> {
        check(&u, grid.len())?;
        check(&ut, grid.len())?;
        Ok(Self { grid, u, ut })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, u: vec![0.0; n], ut: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, u: impl Fn(f64) -> f64, ut: impl Fn(f64) -> f64) -> Self {
        let uu = grid.radii().iter().map(|&r| u(r)).collect();
        let vv = grid.radii().iter().map(|&r| ut(r)).collect();
        Self { grid, u: uu, ut: vv }
    }

    pub fn radii(&self) -> &[f64] {
        self.grid.radii()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.ut).all(|v| v.is_finite())
    }

    pub fn sup_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            u: self.u.iter().map(|v| v * k).collect(),
            ut: self.ut.iter().map(|v| v * k).collect(),
        }
    }

    pub fn add(&self, other: &FieldPair) -> Result<Self, FieldError> {
        if *self.grid != *other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            u: self.u.iter().zip(&other.u).map(|(a, b)| a + b).collect(),
            ut: self.ut.iter().zip(&other.ut).map(|(a, b)| a + b).collect(),
        })
    }

    /// Time reversal `(u, u_t) -> (u, -u_t)`.
    pub fn reversed(&self) -> Self {
        Self { grid: self.grid.clone(), u: self.u.clone(), ut: self.ut.iter().map(|v| -v).collect() }
    }

    pub fn u_r(&self) -> Vec<f64> {
        self.grid.derivative(&self.u, Parity::Even)
    }

    pub fn to_reduced(&self) -> ReducedPair {
        let r = self.grid.radii();
        ReducedPair {
            grid: self.grid.clone(),
            w: r.iter().zip(&self.u).map(|(r, u)| r * u).collect(),
            wt: r.iter().zip(&self.ut).map(|(r, v)| r * v).collect(),
        }
    }

    pub fn from_reduced(g: &ReducedPair, rule: OriginRule) -> Result<Self, FieldError> {
        let r = g.grid.radii();
        let mut u: Vec<f64> = r.iter().zip(&g.w).map(|(r, w)| w / r).collect();
        let mut ut: Vec<f64> = r.iter().zip(&g.wt).map(|(r, w)| w / r).collect();
        if g.grid.starts_at_origin() {
            match rule {
                OriginRule::Forbid => return Err(FieldError::OriginDivision),
                OriginRule::Derivative => {
                    u[0] = g.grid.derivative(&g.w, Parity::Odd)[0];
                    ut[0] = g.grid.derivative(&g.wt, Parity::Odd)[0];
                }
            }
        }
        Self::new(g.grid.clone(), u, ut)
    }

    fn check_radius(&self, r: f64) -> Result<(), FieldError> {
        let (lo, hi) = (self.grid.r_min(), self.grid.r_max());
        if r < lo || r > hi || !r.is_finite() {
            return Err(FieldError::OutOfRange { r, r_min: lo, r_max: hi });
        }
        Ok(())
    }

    /// `u` at an arbitrary radius inside the grid.
    pub fn u_at(&self, r: f64) -> Result<f64, FieldError> {
        self.check_radius(r)?;
        Ok(self.grid.interpolate(&self.u, r).unwrap_or(0.0))
    }

    /// Replace the field inside the ball of radius `R` by the constant
    /// `u(R)` and zero velocity.
    ///
    /// Off-node values of `u(R)` come from the cubic through the four nodes
    /// just outside `R`, which the cutoff leaves untouched, so applying the
    /// cutoff twice changes nothing.
    pub fn center_cutoff(&self, big_r: f64) -> Result<Self, FieldError> {
        self.check_radius(big_r)?;
        let r = self.grid.radii();
        let n = r.len();
        let tol = 1e-12 * big_r.abs().max(1.0);
        let value = match r.iter().position(|&x| (x - big_r).abs() <= tol) {
            Some(k) => self.u[k],
            None => {
                let first_out = r.partition_point(|&x| x <= big_r);
                let start = first_out.min(n.saturating_sub(4));
                let idx: Vec<usize> = (start..(start + 4).min(n)).collect();
                lagrange(&idx.iter().map(|&i| r[i]).collect::<Vec<_>>(), &idx.iter().map(|&i| self.u[i]).collect::<Vec<_>>(), big_r)
            }
        };
        let mut out = self.clone();
        for i in 0..n {
            if r[i] <= big_r + tol {
                out.u[i] = value;
                out.ut[i] = 0.0;
            }
        }
        Ok(out)
    }

    /// `4 pi \int_a^b r^2 (u_r^2 + u_t^2) dr`.
    pub fn ring_energy(&self, a: f64, b: f64) -> Result<f64, FieldError> {
        if !(b > a) {
            return Err(FieldError::DegenerateInterval { a, b });
        }
        self.check_radius(a)?;
        self.check_radius(b)?;
        let ur = self.u_r();
        let dens: Vec<f64> = self
            .radii()
            .iter()
            .zip(ur.iter().zip(&self.ut))
            .map(|(r, (d, v))| r * r * (d * d + v * v))
            .collect();
        Ok((4.0 * PI * self.grid.integrate_range(&dens, a, b)).max(0.0))
    }

    /// Energy of the whole grid.
    pub fn total_ring_energy(&self) -> f64 {
        self.ring_energy(self.grid.r_min(), self.grid.r_max()).unwrap_or(0.0)
    }

    /// Discrepancy between the two sides of the `u`/`w` ring identity
    /// `E/(4 pi) = \int_a^b (w_r^2 + w_t^2) dr + a u(a)^2 - b u(b)^2`.
    pub fn reduction_identity_residual(&self, a: f64, b: f64) -> Result<f64, FieldError> {
        if a <= 0.0 {
            return Err(FieldError::SingularBoundary);
        }
        let lhs = self.ring_energy(a, b)? / (4.0 * PI);
        let red = self.to_reduced();
        let parity = if self.grid.starts_at_origin() { Parity::Odd } else { Parity::None };
        let wr = self.grid.derivative(&red.w, parity);
        let dens: Vec<f64> = wr.iter().zip(&red.wt).map(|(d, v)| d * d + v * v).collect();
        let ua = self.u_at(a)?;
        let ub = self.u_at(b)?;
        let rhs = self.grid.integrate_range(&dens, a, b) + a * ua * ua - b * ub * ub;
        Ok((lhs - rhs).abs())
    }

    /// CSV with header `r,u,ut`; values use the shortest round-tripping form.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,u,ut\n");
        for i in 0..self.u.len() {
            let _ = writeln!(s, "{},{},{}", self.radii()[i], self.u[i], self.ut[i]);
        }
        s
    }

    /// Parse [`to_csv`](Self::to_csv) output. The spacing rule is inferred
    /// from the radii.
    pub fn from_csv(text: &str) -> Result<Self, FieldError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("r,u,ut") => {}
            other => return Err(FieldError::Csv(format!("bad header {other:?}"))),
        }
        let (mut r, mut u, mut ut) = (vec![], vec![], vec![]);
        for (k, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(FieldError::Csv(format!("line {}: expected 3 columns", k + 2)));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| FieldError::Csv(format!("line {}: {e}", k + 2)));
            r.push(parse(cols[0])?);
            u.push(parse(cols[1])?);
            ut.push(parse(cols[2])?);
        }
        let grid = infer_grid(&r)?;
        Self::new(Arc::new(grid), u, ut)
    }

    pub fn to_json(&self) -> Result<String, FieldError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, FieldError> {
        let f: FieldPair = serde_json::from_str(text)?;
        Self::new(f.grid, f.u, f.ut)
    }
}

impl ReducedPair {
    /// Sample `(w, w_t)` directly.
    pub fn new(grid: Arc<RadialGrid>, w: Vec<f64>, wt: Vec<f64>) -> Result<Self, FieldError> {
        check(&w, grid.len())?;
        check(&wt, grid.len())?;
        Ok(Self { grid, w, wt })
    }

    pub fn w_r(&self) -> Vec<f64> {
        let parity = if self.grid.starts_at_origin() { Parity::Odd } else { Parity::None };
        self.grid.derivative(&self.w, parity)
    }

    /// `\int (w_r^2 + w_t^2) dr` over `[a, b]`.
    pub fn energy_1d(&self, a: f64, b: f64) -> f64 {
        let wr = self.w_r();
        let dens: Vec<f64> = wr.iter().zip(&self.wt).map(|(d, v)| d * d + v * v).collect();
        self.grid.integrate_range(&dens, a, b)
    }
}

fn infer_grid(r: &[f64]) -> Result<RadialGrid, FieldError> {
    let n = r.len();
    if n < 2 {
        return Err(GridError::TooFewSamples(n).into());
    }
    let (lo, hi) = (r[0], r[n - 1]);
    for spacing in [Spacing::Uniform, Spacing::Geometric] {
        if let Ok(g) = RadialGrid::new(lo, hi, n, spacing) {
            let scale = hi.abs().max(1e-300);
            if g.radii().iter().zip(r).all(|(a, b)| (a - b).abs() <= 1e-9 * scale.max(a.abs())) {
                return Ok(g);
            }
        }
    }
    Err(FieldError::Csv("radii are neither uniform nor geometric".into()))
}

/// Lagrange interpolation through arbitrary nodes.
pub(crate) fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..xs.len() {
        let mut l = 1.0;
        for j in 0..xs.len() {
            if i != j {
                l *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        total += ys[i] * l;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(a: f64, b: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(a, b, n, Spacing::Uniform).unwrap())
    }

    #[test]
    fn reduction_of_singular_family() {
        let g = uniform(0.5, 3.0, 26);
        let c = (2.0f64 / 9.0).cbrt();
        let f = FieldPair::from_fn(g, |r| c * r.powf(-2.0 / 3.0), |_| 0.0);
        let red = f.to_reduced();
        for (r, w) in red.grid.radii().iter().zip(&red.w) {
            assert!((w - c * r.powf(1.0 / 3.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn from_reduced_at_origin_needs_rule() {
        let g = uniform(0.0, 3.0, 301);
        let red = ReducedPair::new(
            g.clone(),
            g.radii().iter().map(|r| r * (-r * r).exp()).collect(),
            vec![0.0; 301],
        )
        .unwrap();
        assert!(matches!(FieldPair::from_reduced(&red, OriginRule::Forbid), Err(FieldError::OriginDivision)));
        let f = FieldPair::from_reduced(&red, OriginRule::Derivative).unwrap();
        for (r, u) in g.radii().iter().zip(&f.u) {
            assert!((u - (-r * r).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn ring_energy_of_inverse_radius() {
        let g = uniform(0.5, 3.0, 2001);
        let f = FieldPair::from_fn(g, |r| 1.0 / r, |_| 0.0);
        let e = f.ring_energy(1.0, 2.0).unwrap();
        assert!((e - 2.0 * PI).abs() < 1e-9, "{e}");
        assert!(f.reduction_identity_residual(1.0, 2.0).unwrap() < 1e-9);
        assert!(matches!(f.reduction_identity_residual(0.0, 2.0), Err(FieldError::SingularBoundary)));
    }

    #[test]
    fn cutoff_definition() {
        let g = uniform(0.0, 4.0, 401);
        let f = FieldPair::from_fn(g, |r| (-r).exp(), |r| r.sin() + 2.0);
        let c = f.center_cutoff(1.0).unwrap();
        for (i, &r) in c.radii().iter().enumerate() {
            if r <= 1.0 {
                assert!((c.u[i] - (-1f64).exp()).abs() < 1e-14);
                assert_eq!(c.ut[i], 0.0);
            } else {
                assert_eq!(c.u[i], f.u[i]);
                assert_eq!(c.ut[i], f.ut[i]);
            }
        }
        let edge = f.center_cutoff(0.0).unwrap();
        assert_eq!(edge.u, f.u);
        assert_eq!(&edge.ut[1..], &f.ut[1..]);
        assert!(f.center_cutoff(5.0).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let g = Arc::new(RadialGrid::new(0.01, 10.0, 37, Spacing::Geometric).unwrap());
        let f = FieldPair::from_fn(g, |r| (1.0 + r * r).recip().sqrt() * 3f64.sqrt(), |r| r.cos() / 3.0);
        let back = FieldPair::from_csv(&f.to_csv()).unwrap();
        assert_eq!(back.u, f.u);
        assert_eq!(back.ut, f.ut);
        assert_eq!(back.radii(), f.radii());
        let j = f.to_json().unwrap();
        assert!(j.starts_with("{\"grid\":{"));
        assert_eq!(FieldPair::from_json(&j).unwrap(), f);
    }

    #[test]
    fn validation() {
        let g = uniform(0.0, 1.0, 3);
        assert!(matches!(FieldPair::new(g.clone(), vec![0.0; 2], vec![0.0; 3]), Err(FieldError::LengthMismatch { .. })));
        assert!(matches!(FieldPair::new(g, vec![0.0, f64::NAN, 0.0], vec![0.0; 3]), Err(FieldError::NonFinite(1))));
    }
}

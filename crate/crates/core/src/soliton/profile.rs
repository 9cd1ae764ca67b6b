use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::{RadialGrid, Spacing};
use crate::numerics::Parity;

use super::SolitonError;

/// How a profile was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FixedPointTail,
    BackwardExtension,
    Explicit,
}

/// Samples of a radial solution `y(r)` of `y'' + (2/r) y' + |y|^{p-1} y = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolitonProfile {
    pub grid: Arc<RadialGrid>,
    pub y: Vec<f64>,
    pub yp: Vec<f64>,
    /// Exact second derivative where a closed form is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ypp: Option<Vec<f64>>,
    pub p: f64,
    pub provenance: Provenance,
}

pub(crate) fn power(y: f64, p: f64) -> f64 {
    y.abs().powf(p - 1.0) * y
}

impl SolitonProfile {
    pub fn radii(&self) -> &[f64] {
        self.grid.radii()
    }

    /// `θ = 2/(p-1)`.
    pub fn theta(&self) -> f64 {
        2.0 / (self.p - 1.0)
    }

    /// Relative ODE residual at every node:
    /// `|y'' + 2y'/r + F(y)| / (|y''| + |2y'/r| + |F(y)|)`, with `y''` exact
    /// when known and otherwise the fourth-order derivative of `y'`.
    pub fn residual(&self) -> Vec<f64> {
        let r = self.radii();
        let ypp = match &self.ypp {
            Some(v) => v.clone(),
            None => self.grid.derivative(&self.yp, Parity::None),
        };
        (0..r.len())
            .map(|i| {
                let (a, b, c) = (ypp[i], 2.0 * self.yp[i] / r[i], power(self.y[i], self.p));
                let scale = a.abs() + b.abs() + c.abs();
                if scale > 0.0 {
                    (a + b + c).abs() / scale
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Largest residual away from the two boundary stencils.
    pub fn max_interior_residual(&self) -> f64 {
        let res = self.residual();
        let n = res.len();
        let skip = if self.ypp.is_some() { 0 } else { 3.min(n / 2) };
        res[skip..n - skip].iter().copied().fold(0.0, f64::max)
    }

    /// `y(r)`, interpolated inside the grid and continued by the `1/r`
    /// envelope beyond it.
    pub fn eval(&self, r: f64) -> f64 {
        let g = &self.grid;
        if r > g.r_max() {
            let n = self.y.len();
            return self.y[n - 1] * g.r_max() / r;
        }
        g.interpolate(&self.y, r).unwrap_or(f64::NAN)
    }

    /// CSV with header `r,y,yp`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,y,yp\n");
        for ((r, y), yp) in self.radii().iter().zip(&self.y).zip(&self.yp) {
            let _ = writeln!(s, "{r},{y},{yp}");
        }
        s
    }

    pub fn zero(grid: Arc<RadialGrid>, p: f64) -> Self {
        let n = grid.len();
        Self { grid, y: vec![0.0; n], yp: vec![0.0; n], ypp: Some(vec![0.0; n]), p, provenance: Provenance::Explicit }
    }
}

/// `C` with `C^{p-1} = θ(1-θ)`, `θ = 2/(p-1)`.
pub fn singular_constant(p: f64) -> f64 {
    let theta = 2.0 / (p - 1.0);
    (theta * (1.0 - theta)).powf(1.0 / (p - 1.0))
}

/// The scale-invariant singular solution `W₁ = C r^{-θ}` sampled on `grid`.
pub fn explicit_singular(p: f64, grid: Arc<RadialGrid>) -> Result<SolitonProfile, SolitonError> {
    if !(p > 3.0 && p < 5.0) {
        return Err(SolitonError::Exponent { p, range: "3 < p < 5" });
    }
    if grid.r_min() <= 0.0 {
        return Err(SolitonError::Origin);
    }
    let theta = 2.0 / (p - 1.0);
    let c = singular_constant(p);
    let r = grid.radii();
    let y = r.iter().map(|&x| c * x.powf(-theta)).collect();
    let yp = r.iter().map(|&x| -theta * c * x.powf(-theta - 1.0)).collect();
    let ypp = r.iter().map(|&x| theta * (theta + 1.0) * c * x.powf(-theta - 2.0)).collect();
    Ok(SolitonProfile { grid, y, yp, ypp: Some(ypp), p, provenance: Provenance::Explicit })
}

/// `±λ^{-1/2} (1 + r²/(3λ²))^{-1/2}` at `r`.
pub fn aubin_talenti_value(lambda: f64, sgn: f64, r: f64) -> f64 {
    sgn.signum() * lambda.powf(-0.5) * (1.0 + r * r / (3.0 * lambda * lambda)).powf(-0.5)
}

/// The explicit ground state family on `grid`; only exists for `p = 5`.
pub fn aubin_talenti(p: f64, lambda: f64, sgn: f64, grid: Arc<RadialGrid>) -> Result<SolitonProfile, SolitonError> {
    if p != 5.0 {
        return Err(SolitonError::Exponent { p, range: "p = 5" });
    }
    if !(lambda > 0.0) {
        return Err(SolitonError::Scale(lambda));
    }
    let c = sgn.signum() * lambda.powf(-0.5);
    let a = 1.0 / (3.0 * lambda * lambda);
    let r = grid.radii();
    let q = |x: f64| 1.0 + a * x * x;
    let y = r.iter().map(|&x| c * q(x).powf(-0.5)).collect();
    let yp = r.iter().map(|&x| -c * a * x * q(x).powf(-1.5)).collect();
    let ypp = r
        .iter()
        .map(|&x| -c * a * q(x).powf(-1.5) + 3.0 * c * a * a * x * x * q(x).powf(-2.5))
        .collect();
    Ok(SolitonProfile { grid, y, yp, ypp: Some(ypp), p: 5.0, provenance: Provenance::Explicit })
}

/// Geometric grid `[r_min, r_max]` with `per_decade` nodes per decade.
pub fn log_grid(r_min: f64, r_max: f64, per_decade: usize) -> Result<Arc<RadialGrid>, SolitonError> {
    let n = ((r_max / r_min).log10() * per_decade as f64).ceil() as usize + 1;
    Ok(Arc::new(RadialGrid::new(r_min, r_max, n.max(5), Spacing::Geometric)?))
}

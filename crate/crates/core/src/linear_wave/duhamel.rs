use std::sync::Arc;

use crate::field::ReducedPair;
use crate::grid::{RadialGrid, Spacing};
use crate::numerics::{self, Parity};

use super::LinearError;

/// A source `h(r, t)` for `w_tt - w_rr = h` on `r >= 0`.
pub trait SpaceTimeSource: Sync {
    fn eval(&self, r: f64, t: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64 + Sync> SpaceTimeSource for F {
    fn eval(&self, r: f64, t: f64) -> f64 {
        self(r, t)
    }
}

/// Source samples on grid × time lattice, linear in time between slices
/// and cubic in space.
#[derive(Debug, Clone)]
pub struct SampledSource {
    pub grid: Arc<RadialGrid>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SpaceTimeSource for SampledSource {
    fn eval(&self, r: f64, t: f64) -> f64 {
        if self.times.is_empty() {
            return 0.0;
        }
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len().max(2) - 1);
        let slice = |j: usize| self.grid.interpolate(&self.values[j], r).unwrap_or(0.0);
        if self.times.len() == 1 {
            return slice(0);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let theta = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        (1.0 - theta) * slice(k - 1) + theta * slice(k)
    }
}

/// Inhomogeneous part of the 1D problem: the solution at `t1` of
/// `w_tt - w_rr = h`, `w(0, t) = 0`, with zero data at `t0`.
///
/// Uses the midpoint rule with `steps` slices in time (default: one per grid
/// step); each slice contributes the d'Alembert integral of the oddly
/// extended source.
pub fn duhamel_integrate(
    grid: &Arc<RadialGrid>,
    h: &dyn SpaceTimeSource,
    t0: f64,
    t1: f64,
    steps: Option<usize>,
) -> Result<ReducedPair, LinearError> {
    if grid.spacing() != Spacing::Uniform || !grid.starts_at_origin() || grid.len() < 5 {
        return Err(LinearError::UnsupportedGrid);
    }
    let dx = grid.step().unwrap();
    let span = t1 - t0;
    let n_steps = steps.unwrap_or_else(|| (span.abs() / dx).ceil().max(1.0) as usize);
    let dt = span / n_steps as f64;
    if dt.abs() > dx * (1.0 + 1e-12) {
        log::warn!("duhamel: time step {} exceeds grid spacing {}", dt.abs(), dx);
    }
    let r = grid.radii();
    let n = r.len();
    let half = grid.r_max();
    let mut w = vec![0.0; n];
    let mut wt = vec![0.0; n];
    let mut slice = vec![0.0; n];
    for k in 0..n_steps {
        let tau = t0 + (k as f64 + 0.5) * dt;
        let s = t1 - tau;
        for (v, &x) in slice.iter_mut().zip(r) {
            *v = h.eval(x, tau);
        }
        slice[0] = 0.0;
        let cum = numerics::cumulative_uniform(&slice, dx, Parity::Odd);
        let total = cum[n - 1];
        let src = |x: f64| {
            let a = x.abs();
            if a > half {
                0.0
            } else {
                x.signum() * numerics::interp_uniform(&slice, 0.0, dx, a).unwrap_or(0.0)
            }
        };
        let anti = |x: f64| {
            let a = x.abs();
            if a > half {
                total
            } else {
                numerics::interp_uniform(&cum, 0.0, dx, a).unwrap_or(total)
            }
        };
        for i in 0..n {
            let (p, m) = (r[i] + s, r[i] - s);
            w[i] += 0.5 * dt * (anti(p) - anti(m));
            wt[i] += 0.5 * dt * (src(p) + src(m));
        }
    }
    Ok(ReducedPair { grid: grid.clone(), w, wt })
}

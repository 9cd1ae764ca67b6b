use std::sync::Arc;

use thiserror::Error;

use crate::field::FieldPair;
use crate::grid::{RadialGrid, Spacing};

use super::config::{EvolutionConfig, Forcing, Scheme, Sign, Status, Trajectory};
use super::nonlinearity;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("evolution needs a uniform grid starting at r = 0 with at least 5 nodes")]
    UnsupportedGrid,
    #[error("cfl must satisfy 0 < cfl <= 1, got {0}")]
    Cfl(f64),
    #[error("invalid config: {field}: {msg}")]
    Config { field: String, msg: String },
    #[error("initial data is not finite")]
    NonFinite,
}

/// `E = ½·4π∫r²(u_t² + u_r²) - σ/(p+1)·4π∫r²|u|^{p+1}`.
pub fn energy(f: &FieldPair, p: f64, sign: Sign) -> f64 {
    let grid = &f.grid;
    let r = grid.radii();
    let ur = f.u_r();
    let quad: Vec<f64> = (0..r.len()).map(|i| r[i] * r[i] * (f.ut[i] * f.ut[i] + ur[i] * ur[i])).collect();
    let pot: Vec<f64> = (0..r.len()).map(|i| r[i] * r[i] * f.u[i].abs().powf(p + 1.0)).collect();
    let four_pi = 4.0 * std::f64::consts::PI;
    four_pi * (0.5 * grid.integrate(&quad) - sign.sigma() / (p + 1.0) * grid.integrate(&pot))
}

/// Exact solution `u*(r, t) = cos t · e^{-r²}` used with [`manufactured_forcing`].
pub fn manufactured_truth(r: f64, t: f64) -> f64 {
    t.cos() * (-r * r).exp()
}

/// Source `u*_tt - Δu* - σ|u*|^{p-1}u*` that makes [`manufactured_truth`] an
/// exact solution of the forced equation.
pub fn manufactured_forcing(p: f64, sign: Sign) -> Forcing {
    Forcing::new(move |r, t| {
        let u = manufactured_truth(r, t);
        u * (5.0 - 4.0 * r * r) - nonlinearity(u, p, sign)
    })
}

/// Right-hand side `g(r, u, t)` added to `Δu`.
pub(crate) type Source<'a> = dyn Fn(f64, f64, f64) -> f64 + Sync + 'a;

/// Evolve `f0` with the configured scheme.
pub fn evolve(f0: &FieldPair, cfg: &EvolutionConfig) -> Result<Trajectory, EvolveError> {
    let (p, sign) = (cfg.p, cfg.sign);
    let forcing = cfg.forcing.clone();
    let g = move |r: f64, u: f64, t: f64| {
        nonlinearity(u, p, sign) + forcing.as_ref().map_or(0.0, |f| f.eval(r, t))
    };
    evolve_with(f0, cfg, &g)
}

pub(crate) fn evolve_with(f0: &FieldPair, cfg: &EvolutionConfig, g: &Source) -> Result<Trajectory, EvolveError> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(EvolveError::Cfl(cfg.cfl));
    }
    cfg.validate().map_err(|(field, msg)| EvolveError::Config { field, msg })?;
    let grid = &f0.grid;
    if grid.spacing() != Spacing::Uniform || !grid.starts_at_origin() || grid.len() < 5 {
        return Err(EvolveError::UnsupportedGrid);
    }
    if !f0.is_finite() {
        return Err(EvolveError::NonFinite);
    }
    match cfg.scheme {
        Scheme::LeapfrogU => Ok(leapfrog(f0, cfg, g)),
        Scheme::CharacteristicsW => Ok(characteristics(f0, cfg, g)),
    }
}

/// Snapshot times `dt, 2dt, …, t_final`.
fn snapshot_times(cfg: &EvolutionConfig) -> Vec<f64> {
    let dt = cfg.snapshot_dt();
    let mut out = Vec::new();
    let mut k = 1;
    loop {
        let t = k as f64 * dt;
        if t >= cfg.t_final * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    if cfg.t_final > 0.0 {
        out.push(cfg.t_final);
    }
    out
}

/// Tracks `sup |u|` and the blow-up time estimates at decade crossings.
struct Monitor {
    alpha: f64,
    limit: f64,
    next_decade: f64,
    estimates: Vec<(f64, f64, f64)>,
}

impl Monitor {
    fn new(m0: f64, cfg: &EvolutionConfig) -> Self {
        let base = if m0 > 0.0 { m0 } else { f64::MIN_POSITIVE };
        Self {
            alpha: 2.0 / (cfg.p - 1.0),
            limit: cfg.blowup_threshold * base,
            next_decade: 10.0 * base,
            estimates: Vec::new(),
        }
    }

    /// Record a step from `m_prev` to `m` ending at `t`; true when the
    /// threshold is exceeded.
    fn record(&mut self, t: f64, dt: f64, m_prev: f64, m: f64) -> bool {
        if m >= self.next_decade && m_prev > 0.0 {
            let rate = (m / m_prev).ln() / dt;
            if rate > 0.0 {
                self.estimates.push((t, m, t + self.alpha / rate));
            }
            while self.next_decade <= m {
                self.next_decade *= 10.0;
            }
        }
        m > self.limit
    }

    fn blowup(&self, t: f64, non_finite: bool) -> Status {
        let t_est = self.estimates.last().map_or(t, |e| e.2.max(t));
        Status::Blowup { t_est, estimates: self.estimates.clone(), non_finite }
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

const MAX_STEPS: usize = 50_000_000;

struct Recorder {
    grid: Arc<RadialGrid>,
    times: Vec<f64>,
    snapshots: Vec<FieldPair>,
    energies: Vec<f64>,
    p: f64,
    sign: Sign,
}

impl Recorder {
    fn push(&mut self, t: f64, u: &[f64], ut: &[f64]) {
        let f = FieldPair { grid: self.grid.clone(), u: u.to_vec(), ut: ut.to_vec() };
        self.energies.push(if f.is_finite() { energy(&f, self.p, self.sign) } else { f64::NAN });
        self.times.push(t);
        self.snapshots.push(f);
    }

    fn finish(self, cfg: &EvolutionConfig, status: Status) -> Trajectory {
        Trajectory {
            config: cfg.clone(),
            grid: self.grid,
            times: self.times,
            snapshots: self.snapshots,
            status,
            energies: self.energies,
        }
    }
}

/// Velocity Verlet on `u` with the radial Laplacian
/// `[(1 + 1/i) u_{i+1} - 2u_i + (1 - 1/i) u_{i-1}] / h²`, which is the
/// three-point Laplacian of `w = r u` divided by `r`. At the origin
/// `Δu(0) = 6 (u_1 - u_0) / h²`. That row is only stable for
/// `dt < h·√(2/3)`, so for `cfl > 0.8` the origin value is instead closed by
/// the even parabolic fit `u_0 = (4u_1 - u_2) / 3`. The outer node is held
/// fixed.
fn leapfrog(f0: &FieldPair, cfg: &EvolutionConfig, g: &Source) -> Trajectory {
    let grid = f0.grid.clone();
    let h = grid.step().unwrap();
    let r = grid.radii().to_vec();
    let n = r.len();
    let closed_origin = cfg.cfl > 0.8;
    let inv_h2 = 1.0 / (h * h);
    let accel = |u: &[f64], t: f64, out: &mut [f64]| {
        out[0] = 6.0 * (u[1] - u[0]) * inv_h2 + g(0.0, u[0], t);
        for i in 1..n - 1 {
            let k = 1.0 / i as f64;
            out[i] = ((1.0 + k) * u[i + 1] - 2.0 * u[i] + (1.0 - k) * u[i - 1]) * inv_h2 + g(r[i], u[i], t);
        }
        out[n - 1] = 0.0;
    };
    let close = |v: &mut [f64]| {
        if closed_origin {
            v[0] = (4.0 * v[1] - v[2]) / 3.0;
        }
    };

    let mut u = f0.u.clone();
    let mut v = f0.ut.clone();
    close(&mut u);
    close(&mut v);
    let mut a = vec![0.0; n];
    accel(&u, 0.0, &mut a);
    let mut rec = Recorder { grid: grid.clone(), times: vec![], snapshots: vec![], energies: vec![], p: cfg.p, sign: cfg.sign };
    rec.push(0.0, &u, &v);
    let targets = snapshot_times(cfg);
    let mut m = sup(&u);
    let mut mon = Monitor::new(m, cfg);
    let base_dt = cfg.cfl * h;
    let mut t = 0.0;
    let mut steps = 0usize;
    let (mut u1, mut v1, mut a1) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut shrink = 1.0_f64;

    for &target in &targets {
        while t < target {
            if steps >= MAX_STEPS {
                return rec.finish(cfg, Status::Truncated { reason: format!("step limit {MAX_STEPS} reached at t = {t}") });
            }
            let amp_dt = if m > 0.0 { 0.1 * m.powf(-(cfg.p - 1.0) / 2.0) } else { f64::INFINITY };
            let mut dt = base_dt.min(amp_dt) * shrink;
            let last = target - t <= dt * (1.0 + 1e-9);
            if last {
                dt = target - t;
            }
            if dt < 1e-15 * t.abs().max(1.0) {
                return rec.finish(cfg, Status::Truncated { reason: format!("time step underflow at t = {t}") });
            }
            for i in 0..n {
                v1[i] = v[i] + 0.5 * dt * a[i];
                u1[i] = u[i] + dt * v1[i];
            }
            close(&mut u1);
            let t1 = if last { target } else { t + dt };
            accel(&u1, t1, &mut a1);
            for i in 0..n {
                v1[i] += 0.5 * dt * a1[i];
            }
            close(&mut v1);
            let m1 = sup(&u1);
            steps += 1;
            if m1.is_finite() && m > 0.0 && m1 > 10.0 * m && dt > 1e-15 * t.abs().max(1.0) * 2.0 {
                shrink *= 0.5;
                continue;
            }
            shrink = (shrink * 2.0).min(1.0);
            std::mem::swap(&mut u, &mut u1);
            std::mem::swap(&mut v, &mut v1);
            std::mem::swap(&mut a, &mut a1);
            let m_prev = m;
            m = m1;
            t = t1;
            if !m.is_finite() {
                rec.push(t, &u, &v);
                return rec.finish(cfg, mon.blowup(t, true));
            }
            if mon.record(t, dt, m_prev, m) {
                rec.push(t, &u, &v);
                return rec.finish(cfg, mon.blowup(t, false));
            }
        }
        rec.push(t, &u, &v);
    }
    rec.finish(cfg, Status::Completed)
}

/// Second-order scheme on the characteristic lattice `dt = h` for `w = r u`:
/// `w(r, t+h) = w(r+h, t) + w(r-h, t) - w(r, t-h) + h² r g(r, w/r, t)`,
/// with `w(0, t) = 0`. The first step uses a Taylor expansion. Snapshot
/// times are rounded to the lattice, and `cfl` is ignored.
fn characteristics(f0: &FieldPair, cfg: &EvolutionConfig, g: &Source) -> Trajectory {
    let grid = f0.grid.clone();
    let h = grid.step().unwrap();
    let r = grid.radii().to_vec();
    let n = r.len();
    let to_u = |w: &[f64], out: &mut [f64]| {
        for i in 1..n {
            out[i] = w[i] / r[i];
        }
        out[0] = (4.0 * out[1] - out[2]) / 3.0;
    };
    let src = |w: &[f64], t: f64, out: &mut [f64]| {
        out[0] = 0.0;
        for i in 1..n {
            out[i] = r[i] * g(r[i], w[i] / r[i], t);
        }
    };

    let w0: Vec<f64> = (0..n).map(|i| r[i] * f0.u[i]).collect();
    let w1: Vec<f64> = (0..n).map(|i| r[i] * f0.ut[i]).collect();
    let mut s = vec![0.0; n];
    src(&w0, 0.0, &mut s);
    let mut w_cur = vec![0.0; n];
    for i in 1..n - 1 {
        let lap = (w0[i + 1] - 2.0 * w0[i] + w0[i - 1]) / (h * h);
        w_cur[i] = w0[i] + h * w1[i] + 0.5 * h * h * (lap + s[i]);
    }
    w_cur[n - 1] = w0[n - 1];
    let mut w_prev = w0;

    let mut rec = Recorder { grid: grid.clone(), times: vec![], snapshots: vec![], energies: vec![], p: cfg.p, sign: cfg.sign };
    let mut u0 = f0.u.clone();
    let mut ut0 = f0.ut.clone();
    if n > 2 {
        u0[0] = (4.0 * u0[1] - u0[2]) / 3.0;
        ut0[0] = (4.0 * ut0[1] - ut0[2]) / 3.0;
    }
    rec.push(0.0, &u0, &ut0);
    let targets: Vec<usize> = {
        let mut ks: Vec<usize> = snapshot_times(cfg).iter().map(|&t| (t / h).round() as usize).filter(|&k| k > 0).collect();
        ks.dedup();
        ks
    };
    let mut m = sup(&u0);
    let mut mon = Monitor::new(m, cfg);
    let mut u = vec![0.0; n];
    let mut ut = vec![0.0; n];
    let mut w_next = vec![0.0; n];
    let mut next_target = 0;
    let last_k = targets.last().copied().unwrap_or(0);
    // Step k advances from level k to k + 1; level k is known (w_cur).
    for k in 1..=last_k {
        if k > MAX_STEPS {
            return rec.finish(cfg, Status::Truncated { reason: format!("step limit {MAX_STEPS} reached") });
        }
        let t = k as f64 * h;
        src(&w_cur, t, &mut s);
        w_next[0] = 0.0;
        for i in 1..n - 1 {
            w_next[i] = w_cur[i + 1] + w_cur[i - 1] - w_prev[i] + h * h * s[i];
        }
        w_next[n - 1] = w_cur[n - 1];
        to_u(&w_cur, &mut u);
        let m_prev = m;
        m = sup(&u);
        let done = if !m.is_finite() {
            Some(true)
        } else if mon.record(t, h, m_prev, m) {
            Some(false)
        } else {
            None
        };
        if done.is_some() || targets.get(next_target) == Some(&k) {
            for i in 1..n {
                ut[i] = (w_next[i] - w_prev[i]) / (2.0 * h * r[i]);
            }
            ut[0] = (4.0 * ut[1] - ut[2]) / 3.0;
            rec.push(t, &u, &ut);
            next_target += 1;
        }
        if let Some(non_finite) = done {
            return rec.finish(cfg, mon.blowup(t, non_finite));
        }
        std::mem::swap(&mut w_prev, &mut w_cur);
        std::mem::swap(&mut w_cur, &mut w_next);
    }
    rec.finish(cfg, Status::Completed)
}

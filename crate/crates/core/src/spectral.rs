//! Radial Fourier analysis in three dimensions.
//!
//! Convention: `f̂(ξ) = ∫ f(x) e^{-iξ·x} dx`, which for radial `f` reads
//! `f̂(ρ) = (4π/ρ) ∫ r f(r) sin(ρ r) dr`. Homogeneous Sobolev norms carry
//! the `(2π)^{-3}` factor: `‖f‖²_{Ḣ^s} = (2π)^{-3} 4π ∫ ρ^{2s+2} |f̂|² dρ`.
//!
//! The frequency axis is sampled at Gauss-Legendre nodes on panels of
//! width `π / r_max`, with a dyadic refinement near `ρ = 0` so that the
//! `ρ^{2s+2}` weight is integrated accurately for fractional `s`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldPair};
use crate::grid::{RadialGrid, Spacing};
use crate::numerics::smooth_step;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("input does not decay: {fraction:.3} of ∫ r|f| lies in the outer tenth of the grid")]
    NonDecaying { fraction: f64 },
    #[error("Ḣ^{s} norm diverges (dyadic block ratio {ratio:.3})")]
    Divergent { s: f64, ratio: f64 },
    #[error("Sobolev index {0} outside [-1, 3/2)")]
    IndexOutOfRange(f64),
    #[error("frequency {a} outside resolvable band [{lo}, {hi}]")]
    Unresolvable { a: f64, lo: f64, hi: f64 },
    #[error("zero norm")]
    ZeroNorm,
    #[error("sample count {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Sobolev regularity, restricted to `[-1, 3/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self, SpectralError> {
        if (-1.0..1.5).contains(&s) {
            Ok(Self(s))
        } else {
            Err(SpectralError::IndexOutOfRange(s))
        }
    }
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Samples of `f̂` on the quadrature nodes of the frequency axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub rho: Vec<f64>,
    pub fhat: Vec<f64>,
    /// Quadrature weights for `∫ · dρ` on the sampled range.
    pub weights: Vec<f64>,
    /// True when sampling stopped because `f̂` had become negligible.
    pub resolved: bool,
    /// Fraction of `∫ r |f| dr` lying in the outer tenth of the grid.
    pub tail_fraction: f64,
    /// Panel boundaries; panel `i` owns nodes `5i..5i+5`.
    pub edges: Vec<f64>,
    #[serde(skip)]
    source: Option<Source>,
}

/// What is needed to evaluate `f̂` at new frequencies.
#[derive(Debug, Clone)]
struct Source {
    grid: RadialGrid,
    rf_w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm_kind: String,
    pub s: f64,
    pub value: f64,
    pub est_error: f64,
}

/// Fraction of `∫ r|f|` in the outer tenth of the grid above which input
/// counts as non-decaying.
const TAIL_LIMIT: f64 = 0.05;
/// Relative size below which `ρ^{5/2} |f̂|` is treated as zero.
const NEGLIGIBLE: f64 = 1e-13;

/// 5-point Gauss-Legendre on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

fn push_panel(rho: &mut Vec<f64>, w: &mut Vec<f64>, a: f64, b: f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    for &(x, wt) in &GL5 {
        rho.push(mid + half * x);
        w.push(half * wt);
    }
}

/// Smallest grid spacing, used for the Nyquist limit.
fn min_step(grid: &RadialGrid) -> f64 {
    let r = grid.radii();
    r[1] - r[0]
}

/// Resolvable frequency band `[π/r_max, π/h]` of a grid.
pub fn resolvable_band(grid: &RadialGrid) -> (f64, f64) {
    (PI / grid.r_max(), PI / min_step(grid))
}

/// `∫ r f(r) sin(ρ r) dr` on the grid for every requested `ρ`.
fn sine_sums(grid: &RadialGrid, rf_w: &[f64], rho: &[f64]) -> Vec<f64> {
    let r = grid.radii();
    match grid.spacing() {
        Spacing::Uniform => {
            let h = grid.step().unwrap();
            let r0 = r[0];
            rho.iter()
                .map(|&k| {
                    // rotate (cos, sin) by k h, resynchronising periodically
                    let (sd, cd) = (k * h).sin_cos();
                    let mut total = 0.0;
                    let mut s = 0.0;
                    let mut c = 0.0;
                    for (i, &v) in rf_w.iter().enumerate() {
                        if i % 64 == 0 {
                            let (ss, cc) = (k * (r0 + i as f64 * h)).sin_cos();
                            s = ss;
                            c = cc;
                        } else {
                            let ns = s * cd + c * sd;
                            c = c * cd - s * sd;
                            s = ns;
                        }
                        total += v * s;
                    }
                    total
                })
                .collect()
        }
        Spacing::Geometric => rho
            .iter()
            .map(|&k| rf_w.iter().zip(r).map(|(v, x)| v * (k * x).sin()).sum())
            .collect(),
    }
}

/// Weights for the sine transform. Uniform grids use the trapezoid rule:
/// the integrand `r f(r) sin(ρ r)` is even and smooth, so the trapezoid rule
/// is spectrally accurate and, unlike Simpson, does not alias frequencies
/// above half the Nyquist limit.
fn transform_weights(grid: &RadialGrid) -> Vec<f64> {
    match grid.spacing() {
        Spacing::Uniform => {
            let h = grid.step().unwrap();
            let n = grid.len();
            (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect()
        }
        Spacing::Geometric => grid.weights(),
    }
}

impl Source {
    fn new(grid: &RadialGrid, f: &[f64]) -> Self {
        let w = transform_weights(grid);
        let rf_w = f.iter().zip(grid.radii()).zip(&w).map(|((v, x), wt)| v * x * wt).collect();
        Self { grid: grid.clone(), rf_w }
    }

    /// `f̂(ρ)` at each requested frequency.
    fn eval(&self, rho: &[f64]) -> Vec<f64> {
        let sums = sine_sums(&self.grid, &self.rf_w, rho);
        let moment: f64 = self.rf_w.iter().zip(self.grid.radii()).map(|(v, r)| v * r).sum();
        rho.iter()
            .zip(sums)
            .map(|(&k, s)| if k == 0.0 { 4.0 * PI * moment } else { 4.0 * PI * s / k })
            .collect()
    }

    /// Round-off level of `f̂(ρ)`, times `ρ`.
    fn noise(&self) -> f64 {
        4.0 * PI * 64.0 * f64::EPSILON * self.rf_w.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Three-dimensional Fourier transform of the radial function `f`.
///
/// Sampling runs up to the Nyquist frequency `π/h` of the innermost cell
/// but stops early once `f̂` has fallen below round-off or below `1e-13` of
/// its (weighted) peak over a whole dyadic block.
pub fn radial_fourier(grid: &RadialGrid, f: &[f64]) -> Result<Spectrum, SpectralError> {
    if f.len() != grid.len() {
        return Err(SpectralError::LengthMismatch { expected: grid.len(), got: f.len() });
    }
    let r = grid.radii();
    let abs_mass: Vec<f64> = f.iter().zip(r).map(|(v, x)| (v * x).abs()).collect();
    let total_mass = grid.integrate(&abs_mass);
    let outer = grid.r_max() - 0.1 * (grid.r_max() - grid.r_min());
    let tail_fraction = if total_mass > 0.0 {
        grid.integrate_range(&abs_mass, outer, grid.r_max()) / total_mass
    } else {
        0.0
    };
    if tail_fraction > TAIL_LIMIT {
        return Err(SpectralError::NonDecaying { fraction: tail_fraction });
    }

    let source = Source::new(grid, f);
    let noise = source.noise();
    let (width, rho_max) = resolvable_band(grid);
    // dyadic panels on (0, width], then uniform panels
    let mut edges: Vec<f64> = vec![0.0];
    edges.extend((0..=40).map(|k| width * 0.5f64.powi(40 - k)));
    let mut rho = Vec::new();
    let mut wts = Vec::new();
    for e in edges.windows(2) {
        push_panel(&mut rho, &mut wts, e[0], e[1]);
    }
    let mut fhat = source.eval(&rho);
    let weight = |k: f64, v: f64| k.max(1.0).powf(2.5) * v.abs();
    let mut peak = rho.iter().zip(&fhat).map(|(&k, &v)| weight(k, v)).fold(0.0, f64::max);
    let mut last_significant = width;
    let mut resolved = peak == 0.0;
    let mut a = width;
    let top = rho_max * (1.0 - 1e-12);
    while a < top && !resolved {
        let mut new_rho = Vec::new();
        let mut new_w = Vec::new();
        for _ in 0..32 {
            if a >= top {
                break;
            }
            let b = (a + width).min(rho_max);
            push_panel(&mut new_rho, &mut new_w, a, b);
            edges.push(b);
            a = b;
        }
        let vals = source.eval(&new_rho);
        for (&k, &v) in new_rho.iter().zip(&vals) {
            let g = weight(k, v);
            peak = peak.max(g);
            if g > NEGLIGIBLE * peak && v.abs() * k > noise {
                last_significant = k;
            }
        }
        rho.extend(new_rho);
        wts.extend(new_w);
        fhat.extend(vals);
        resolved = a > 2.0 * last_significant && a > 8.0 * width;
    }
    Ok(Spectrum { rho, fhat, weights: wts, resolved, tail_fraction, edges, source: Some(source) })
}

impl Spectrum {
    /// CSV with header `rho,fhat`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho,fhat\n");
        for (k, v) in self.rho.iter().zip(&self.fhat) {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }

    fn rho_max(&self) -> f64 {
        self.rho.last().copied().unwrap_or(0.0)
    }

    /// Quadrature nodes, values and weights, with panels meeting `band`
    /// split sixteen ways so that a multiplier transition inside the band is
    /// integrated accurately.
    fn nodes(&self, band: Option<(f64, f64)>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (Some((lo, hi)), Some(src)) = (band, self.source.as_ref()) else {
            return (self.rho.clone(), self.fhat.clone(), self.weights.clone());
        };
        let mut rho = Vec::with_capacity(self.rho.len());
        let mut val = Vec::with_capacity(self.rho.len());
        let mut wts = Vec::with_capacity(self.rho.len());
        for (i, e) in self.edges.windows(2).enumerate() {
            let (a, b) = (e[0], e[1]);
            if b > lo && a < hi {
                let mut sub_r = Vec::new();
                let mut sub_w = Vec::new();
                for j in 0..16 {
                    let x0 = a + (b - a) * j as f64 / 16.0;
                    let x1 = a + (b - a) * (j + 1) as f64 / 16.0;
                    push_panel(&mut sub_r, &mut sub_w, x0, x1);
                }
                val.extend(src.eval(&sub_r));
                rho.extend(sub_r);
                wts.extend(sub_w);
            } else {
                rho.extend_from_slice(&self.rho[5 * i..5 * i + 5]);
                val.extend_from_slice(&self.fhat[5 * i..5 * i + 5]);
                wts.extend_from_slice(&self.weights[5 * i..5 * i + 5]);
            }
        }
        (rho, val, wts)
    }

    /// `(2π)^{-3} 4π ∫ ρ^{2s+2} |m(ρ) f̂|² dρ` together with an estimate of
    /// the truncated high-frequency tail.
    fn weighted_square(
        &self,
        s: f64,
        multiplier: impl Fn(f64) -> f64,
        band: Option<(f64, f64)>,
    ) -> Result<(f64, f64), SpectralError> {
        let c = 4.0 * PI / (2.0 * PI).powi(3);
        let (rho, val, wts) = self.nodes(band);
        let top = self.rho_max();
        let mut total = 0.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for ((&k, &v), &w) in rho.iter().zip(&val).zip(&wts) {
            let m = multiplier(k);
            let d = w * c * k.powf(2.0 * s + 2.0) * (m * v) * (m * v);
            total += d;
            if k > top / 2.0 {
                b1 += d;
            } else if k > top / 4.0 {
                b2 += d;
            }
        }
        if self.resolved || total == 0.0 {
            return Ok((total, 0.0));
        }
        let ratio = if b2 > 0.0 { b1 / b2 } else { 0.0 };
        if ratio >= 0.7 && b1 > 1e-3 * total {
            return Err(SpectralError::Divergent { s, ratio });
        }
        let tail = if ratio < 1.0 { b1 * ratio / (1.0 - ratio) } else { b1 };
        Ok((total, tail))
    }

    /// `‖f‖_{Ḣ^s}`.
    pub fn sobolev_norm(&self, s: SobolevIndex) -> Result<NormReport, SpectralError> {
        let (sq, tail) = self.weighted_square(s.value(), |_| 1.0, None)?;
        let value = sq.sqrt();
        let est_error = if value > 0.0 { (sq + tail).sqrt() - value } else { 0.0 };
        Ok(NormReport { norm_kind: "hdot".into(), s: s.value(), value, est_error })
    }

    /// `‖P f‖_{Ḣ^s}` for the Littlewood-Paley piece `side` at frequency `a`.
    pub fn projected_norm(&self, s: f64, a: f64, side: Side) -> Result<f64, SpectralError> {
        let m = low_pass(a);
        let band = Some((a / 2.0, a));
        let sq = match side {
            Side::Below => self.weighted_square(s, m, band)?.0,
            Side::Above => self.weighted_square(s, |k| 1.0 - m(k), band)?.0,
        };
        Ok(sq.sqrt())
    }

    /// Inverse transform of `m(ρ) f̂(ρ)` on the radii of `grid`; `band`
    /// marks where `m` varies quickly.
    pub fn inverse(&self, grid: &RadialGrid, m: impl Fn(f64) -> f64, band: Option<(f64, f64)>) -> Vec<f64> {
        let (rho, val, wts) = self.nodes(band);
        let g: Vec<f64> = rho
            .iter()
            .zip(&val)
            .zip(&wts)
            .map(|((&k, &v), &w)| w * k * m(k) * v)
            .collect();
        grid.radii()
            .iter()
            .map(|&r| {
                if r == 0.0 {
                    let s: f64 = g.iter().zip(&rho).map(|(v, k)| v * k).sum();
                    s / (2.0 * PI * PI)
                } else {
                    let s: f64 = g.iter().zip(&rho).map(|(v, k)| v * (k * r).sin()).sum();
                    s / (2.0 * PI * PI * r)
                }
            })
            .collect()
    }
}


/// `‖f‖_{Ḣ^s}` of samples on a grid.
pub fn sobolev_norm(grid: &RadialGrid, f: &[f64], s: SobolevIndex) -> Result<NormReport, SpectralError> {
    radial_fourier(grid, f)?.sobolev_norm(s)
}

/// `(‖u‖²_{Ḣ^s} + ‖u_t‖²_{Ḣ^{s-1}})^{1/2}`.
pub fn pair_norm(f: &FieldPair, s: SobolevIndex) -> Result<NormReport, SpectralError> {
    let a = sobolev_norm(&f.grid, &f.u, s)?;
    let spec = radial_fourier(&f.grid, &f.ut)?;
    let (sq, tail) = spec.weighted_square(s.value() - 1.0, |_| 1.0, None)?;
    let value = (a.value * a.value + sq).sqrt();
    let est_error = (value * value + tail + 2.0 * a.value * a.est_error).sqrt() - value;
    Ok(NormReport { norm_kind: "hdot_pair".into(), s: s.value(), value, est_error })
}

/// Low-pass multiplier `m_{<A}`: 1 on `[0, A/2]`, 0 on `[A, ∞)`, smooth and
/// monotone in between.
pub fn low_pass(a: f64) -> impl Fn(f64) -> f64 {
    move |rho| 1.0 - smooth_step((rho - a / 2.0) / (a / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

/// Littlewood-Paley projection `P_{<A} f` or `P_{>A} f`.
///
/// `P_{>A}` is computed by inverting `(1 - m_{<A}) f̂` and `P_{<A}` as its
/// complement, so the two pieces add back to `f` exactly.
pub fn lp_project(grid: &RadialGrid, f: &[f64], a: f64, side: Side) -> Result<Vec<f64>, SpectralError> {
    let (lo, hi) = resolvable_band(grid);
    if !(a >= lo * (1.0 - 1e-12) && a <= hi * (1.0 + 1e-12)) {
        return Err(SpectralError::Unresolvable { a, lo, hi });
    }
    let spec = radial_fourier(grid, f)?;
    let m = low_pass(a);
    let high = spec.inverse(grid, |k| 1.0 - m(k), Some((a / 2.0, a)));
    Ok(match side {
        Side::Above => high,
        Side::Below => f.iter().zip(&high).map(|(v, h)| v - h).collect(),
    })
}

/// `sup_r r^{3/2-s} |f(r)| / ‖f‖_{Ḣ^s}` for `1/2 < s < 3/2`.
pub fn pointwise_bound_ratio(grid: &RadialGrid, f: &[f64], s: SobolevIndex) -> Result<f64, SpectralError> {
    let sv = s.value();
    if !(sv > 0.5 && sv < 1.5) {
        return Err(SpectralError::IndexOutOfRange(sv));
    }
    let norm = sobolev_norm(grid, f, s)?.value;
    if norm == 0.0 {
        return Err(SpectralError::ZeroNorm);
    }
    let sup = grid
        .radii()
        .iter()
        .zip(f)
        .map(|(r, v)| r.powf(1.5 - sv) * v.abs())
        .fold(0.0, f64::max);
    Ok(sup / norm)
}

/// Result of gluing two fields across the shell `R <= r <= 2R`.
#[derive(Debug, Clone)]
pub struct Glued {
    pub field: Vec<f64>,
    pub ratio: f64,
}

/// Glue `f1` (inside `B(0,R)`) to `f2` (outside `B(0,2R)`) with the smooth
/// cutoff `φ(r/R)` and report `‖f‖ / (‖f1‖ + ‖f2‖)` in `Ḣ^s`.
pub fn glue_check(grid: &RadialGrid, f1: &[f64], f2: &[f64], big_r: f64, s: f64) -> Result<Glued, SpectralError> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(SpectralError::IndexOutOfRange(s));
    }
    for f in [f1, f2] {
        if f.len() != grid.len() {
            return Err(SpectralError::LengthMismatch { expected: grid.len(), got: f.len() });
        }
    }
    let idx = SobolevIndex::new(s)?;
    let phi = |r: f64| 1.0 - smooth_step(r / big_r - 1.0);
    let field: Vec<f64> = grid
        .radii()
        .iter()
        .zip(f1.iter().zip(f2))
        .map(|(&r, (a, b))| phi(r) * a + (1.0 - phi(r)) * b)
        .collect();
    let n1 = sobolev_norm(grid, f1, idx)?.value;
    let n2 = sobolev_norm(grid, f2, idx)?.value;
    if n1 + n2 == 0.0 {
        return Err(SpectralError::ZeroNorm);
    }
    let n = sobolev_norm(grid, &field, idx)?.value;
    Ok(Glued { field, ratio: n / (n1 + n2) })
}

//! Finite differences, quadrature, interpolation and smooth cutoff profiles
//! on one-dimensional sample lattices.
//!
//! Everything here works on plain slices. Uniform lattices get fourth-order
//! stencils; geometric lattices are handled by the callers through the
//! logarithmic variable `xi = ln r`, which is uniform.

/// Behaviour of a sampled function under reflection through `x = 0`.
///
/// Only meaningful when the first sample sits at the origin; it lets central
/// stencils run across the axis instead of falling back to one-sided ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    None,
    Even,
    Odd,
}

impl Parity {
    fn ghost(self, values: &[f64], k: usize) -> Option<f64> {
        match self {
            Parity::None => None,
            Parity::Even => values.get(k).copied(),
            Parity::Odd => values.get(k).map(|v| -v),
        }
    }
}

/// Fourth-order first derivative on a uniform lattice with spacing `h`.
///
/// Central five-point stencil in the interior, five-point one-sided stencils
/// at the ends (or reflected ghosts at the left end when `parity` says so).
/// Lattices shorter than five samples fall back to second order.
pub fn derivative_uniform(values: &[f64], h: f64, parity: Parity) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n < 5 {
        for i in 0..n {
            out[i] = if i == 0 {
                (values[1] - values[0]) / h
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / h
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            };
        }
        return out;
    }
    let f = values;
    let c = 1.0 / (12.0 * h);
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
    }
    match (parity.ghost(f, 1), parity.ghost(f, 2)) {
        (Some(g1), Some(g2)) => {
            out[0] = (g2 - 8.0 * g1 + 8.0 * f[1] - f[2]) * c;
            out[1] = (g1 - 8.0 * f[0] + 8.0 * f[2] - f[3]) * c;
        }
        _ => {
            out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
            out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
        }
    }
    let m = n - 1;
    out[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) * c;
    out[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) * c;
    out
}

/// Composite Simpson weights for `n` samples with spacing `h`.
///
/// An odd number of intervals closes with the Simpson 3/8 rule on the last
/// three intervals; two samples degrade to the trapezoid rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    let m = n - 1;
    if m == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let even_part = if m % 2 == 0 { m } else { m - 3 };
    let mut i = 0;
    while i < even_part {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if m % 2 == 1 {
        let s = even_part;
        let k = 3.0 * h / 8.0;
        w[s] += k;
        w[s + 1] += 3.0 * k;
        w[s + 2] += 3.0 * k;
        w[s + 3] += k;
    }
    w
}

/// Simpson integral of uniformly spaced samples.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Trapezoid integral over arbitrary (increasing) abscissae.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Running integral `F_i = \int_{x_0}^{x_i} f` on a uniform lattice, fourth order.
///
/// Each cell uses the cubic through its four nearest samples. With
/// `Parity::Odd`/`Even` the left end borrows reflected ghosts.
pub fn cumulative_uniform(values: &[f64], h: f64, parity: Parity) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let f = values;
    if n < 4 {
        for i in 1..n {
            out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
        }
        return out;
    }
    let k = h / 24.0;
    for i in 0..n - 1 {
        let cell = if i == 0 {
            match parity.ghost(f, 1) {
                Some(g) => k * (-g + 13.0 * f[0] + 13.0 * f[1] - f[2]),
                None => k * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]),
            }
        } else if i + 2 < n {
            k * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
        } else {
            k * (f[i - 2] - 5.0 * f[i - 1] + 19.0 * f[i] + 9.0 * f[i + 1])
        };
        out[i + 1] = out[i] + cell;
    }
    out
}

/// Index of the left end of the four-point Lagrange stencil around
/// fractional position `s` (in units of the spacing) for `n` samples.
fn stencil_start(s: f64, n: usize) -> usize {
    let i = s.floor() as isize - 1;
    i.clamp(0, n as isize - 4) as usize
}

/// Cubic Lagrange interpolation on a uniform lattice `x_i = x0 + i h`.
///
/// Returns `None` outside `[x0, x0 + (n-1) h]`.
pub fn interp_uniform(values: &[f64], x0: f64, h: f64, x: f64) -> Option<f64> {
    let n = values.len();
    let s = (x - x0) / h;
    let last = (n - 1) as f64;
    if !(s >= -1e-12 && s <= last + 1e-12) {
        return None;
    }
    if n < 4 {
        let i = (s.floor() as usize).min(n.saturating_sub(2));
        let t = s - i as f64;
        return Some(values[i] * (1.0 - t) + values[(i + 1).min(n - 1)] * t);
    }
    let i = stencil_start(s, n);
    let t = s - i as f64;
    let f = &values[i..i + 4];
    // Lagrange basis on nodes 0,1,2,3
    let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    Some(f[0] * l0 + f[1] * l1 + f[2] * l2 + f[3] * l3)
}

/// Derivative of the cubic Lagrange interpolant on a uniform lattice.
pub fn interp_uniform_derivative(values: &[f64], x0: f64, h: f64, x: f64) -> Option<f64> {
    let n = values.len();
    let s = (x - x0) / h;
    let last = (n - 1) as f64;
    if !(s >= -1e-12 && s <= last + 1e-12) || n < 4 {
        return None;
    }
    let i = stencil_start(s, n);
    let t = s - i as f64;
    let f = &values[i..i + 4];
    let d0 = -(3.0 * t * t - 12.0 * t + 11.0) / 6.0;
    let d1 = (3.0 * t * t - 10.0 * t + 6.0) / 2.0;
    let d2 = -(3.0 * t * t - 8.0 * t + 3.0) / 2.0;
    let d3 = (3.0 * t * t - 6.0 * t + 2.0) / 6.0;
    Some((f[0] * d0 + f[1] * d1 + f[2] * d2 + f[3] * d3) / h)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, five points.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Composite five-point Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b == a {
        return 0.0;
    }
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * w;
        let mid = lo + 0.5 * w;
        for &(x, wt) in &GL5 {
            total += wt * f(mid + 0.5 * w * x);
        }
    }
    0.5 * w * total
}

/// C-infinity monotone step: 0 for `t <= 0`, 1 for `t >= 1`.
///
/// Built from `exp(-1/x)` so every derivative vanishes at both junctions.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

use serde::{Deserialize, Serialize};

use crate::grid::RadialGrid;
use crate::numerics::smooth_step;
use crate::spectral::{sobolev_norm, SobolevIndex};

use super::{SolitonError, SolitonProfile};

/// Decades of `r` a profile must span.
pub const MIN_DECADES: f64 = 4.0;
/// The innermost decade must keep `|v|` above this fraction of its median
/// over the reference decade `[100 r_min, 1000 r_min]`. A regular profile
/// has `v ~ W(0) r^θ` with `θ >= 1/2`, which puts the ratio near `0.05`.
const V_FLOOR_FRACTION: f64 = 0.1;
/// Dyadic pieces count as non-decaying when the innermost one keeps at least
/// this fraction of the one three decades further out.
const PIECE_RETENTION: f64 = 0.5;
/// Pieces per three decades of `ε`.
const PIECES_3DEC: usize = 10;

/// Local extrema of `v` on an interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Monotonicity {
    pub r_lo: f64,
    pub r_hi: f64,
    pub monotone: bool,
    pub positive_local_max: usize,
    pub negative_local_min: usize,
    pub other_extrema: usize,
}

/// `Ḣ^{s_p}` norm of the profile localized to `|x| ~ ε`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DyadicPiece {
    pub eps: f64,
    pub norm: f64,
    /// `(Σ norm²)^{1/2}` over this and all outer pieces.
    pub cumulative: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub p: f64,
    pub nontrivial: bool,
    /// `lim r y(r)`, read off at the outer end.
    pub tail_amplitude: f64,
    /// `sup r^{p-2} |y - a/r|` over each of the two outer decades, outermost
    /// last.
    pub tail_deviation: [f64; 2],
    /// `sup r² |y'|` over the same decades.
    pub derivative_envelope: [f64; 2],
    /// Both sups do not grow from one decade to the next.
    pub tail_bounded: bool,
    /// `min |v|` over the innermost decade.
    pub v_floor: f64,
    /// Median of `|v|` over the reference decade.
    pub v_median: f64,
    /// `v` stays away from 0 as `r → 0`: the profile is singular.
    pub singular: bool,
    pub pieces: Vec<DyadicPiece>,
    /// Pieces over the innermost three decades do not decay.
    pub divergent: bool,
    pub inner: Monotonicity,
    pub outer: Monotonicity,
}

/// `v = r^θ y`.
pub fn v_profile(s: &SolitonProfile) -> Vec<f64> {
    let theta = s.theta();
    s.radii().iter().zip(&s.y).map(|(r, y)| r.powf(theta) * y).collect()
}

fn sup_on(r: &[f64], vals: impl Iterator<Item = f64>, lo: f64, hi: f64) -> f64 {
    r.iter().zip(vals).filter(|(x, _)| **x >= lo && **x <= hi).map(|(_, v)| v).fold(0.0, f64::max)
}

fn monotonicity(r: &[f64], v: &[f64], lo: f64, hi: f64) -> Monotonicity {
    let idx: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= lo && r[i] <= hi).collect();
    let scale = idx.iter().map(|&i| v[i].abs()).fold(0.0, f64::max);
    let noise = 1e-11 * scale;
    // Signs of the significant increments.
    let mut signs: Vec<(usize, i8)> = Vec::new();
    for w in idx.windows(2) {
        let d = v[w[1]] - v[w[0]];
        if d.abs() > noise {
            let sg = if d > 0.0 { 1 } else { -1 };
            if signs.last().map_or(true, |&(_, s)| s != sg) {
                signs.push((w[0], sg));
            }
        }
    }
    let (mut pmax, mut nmin, mut other) = (0, 0, 0);
    for w in signs.windows(2) {
        let at = v[w[1].0];
        match (w[0].1, w[1].1) {
            (1, -1) if at > 0.0 => pmax += 1,
            (-1, 1) if at < 0.0 => nmin += 1,
            _ => other += 1,
        }
    }
    Monotonicity {
        r_lo: lo,
        r_hi: hi,
        monotone: signs.len() <= 1,
        positive_local_max: pmax,
        negative_local_min: nmin,
        other_extrema: other,
    }
}

/// Localized pieces `‖W χ(|x|/ε)‖_{Ḣ^{s_p}}` for `ε = 2^{-k}` inside the
/// profile range, outermost first. By scaling each piece equals
/// `ε^θ ‖W(ε z) χ(z)‖` on a fixed grid in `z`.
fn dyadic_pieces(s: &SolitonProfile) -> Result<Vec<DyadicPiece>, SolitonError> {
    let theta = s.theta();
    let sp = SobolevIndex::new(1.5 - theta).map_err(|_| SolitonError::Exponent { p: s.p, range: "3 < p <= 5" })?;
    let z = RadialGrid::uniform_from_origin(4.0, 1.0 / 128.0)?;
    let phi0 = |x: f64| 1.0 - smooth_step(x - 1.0);
    let chi: Vec<f64> = z.radii().iter().map(|&x| phi0(x) - phi0(2.0 * x)).collect();
    let hi = s.grid.r_max().min(1.0);
    let lo = s.grid.r_min();
    let mut k = (2.0 / hi).log2().ceil() as i32;
    let mut out: Vec<DyadicPiece> = Vec::new();
    let mut acc = 0.0;
    loop {
        let eps = 2f64.powi(-k);
        if eps / 2.0 < lo {
            break;
        }
        let f: Vec<f64> = z
            .radii()
            .iter()
            .zip(&chi)
            .map(|(&x, &c)| if c == 0.0 { 0.0 } else { eps.powf(theta) * s.eval(eps * x) * c })
            .collect();
        let norm = if f.iter().all(|v| *v == 0.0) {
            0.0
        } else {
            sobolev_norm(&z, &f, sp).map_err(|e| SolitonError::Integrator(e.to_string()))?.value
        };
        acc += norm * norm;
        out.push(DyadicPiece { eps, norm, cumulative: acc.sqrt() });
        k += 1;
    }
    Ok(out)
}

pub fn soliton_diagnostics(s: &SolitonProfile) -> Result<Diagnostics, SolitonError> {
    let (lo, hi) = (s.grid.r_min(), s.grid.r_max());
    let decades = if lo > 0.0 { (hi / lo).log10() } else { 0.0 };
    if decades < MIN_DECADES - 1e-9 {
        return Err(SolitonError::Range { decades, needed: MIN_DECADES });
    }
    let p = s.p;
    let r = s.radii();
    let n = r.len();
    let nontrivial = s.y.iter().any(|v| *v != 0.0);
    let a = r[n - 1] * s.y[n - 1];

    let dev = |l: f64, h: f64| sup_on(r, r.iter().zip(&s.y).map(|(x, y)| x.powf(p - 2.0) * (y - a / x).abs()), l, h);
    let der = |l: f64, h: f64| sup_on(r, r.iter().zip(&s.yp).map(|(x, d)| x * x * d.abs()), l, h);
    let tail_deviation = [dev(hi / 100.0, hi / 10.0), dev(hi / 10.0, hi)];
    let derivative_envelope = [der(hi / 100.0, hi / 10.0), der(hi / 10.0, hi)];
    let grows = |v: [f64; 2]| v[1] > 2.0 * v[0] + 1e-300;
    let tail_bounded = !grows(tail_deviation) && !grows(derivative_envelope);

    let v = v_profile(s);
    let v_floor = r.iter().zip(&v).filter(|(x, _)| **x <= 10.0 * lo).map(|(_, v)| v.abs()).fold(f64::INFINITY, f64::min);
    let mut reference: Vec<f64> = r.iter().zip(&v).filter(|(x, _)| **x >= 100.0 * lo && **x <= 1000.0 * lo).map(|(_, v)| v.abs()).collect();
    reference.sort_by(f64::total_cmp);
    let v_median = if reference.is_empty() { 0.0 } else { reference[reference.len() / 2] };
    let singular = v_median > 0.0 && v_floor > V_FLOOR_FRACTION * v_median;

    let pieces = dyadic_pieces(s)?;
    let divergent = pieces.len() > PIECES_3DEC && {
        let last = pieces[pieces.len() - 1].norm;
        let first = pieces[pieces.len() - 1 - PIECES_3DEC].norm;
        first > 0.0 && last >= PIECE_RETENTION * first
    };

    Ok(Diagnostics {
        p,
        nontrivial,
        tail_amplitude: a,
        tail_deviation,
        derivative_envelope,
        tail_bounded,
        v_floor,
        v_median,
        singular,
        pieces,
        divergent,
        inner: monotonicity(r, &v, lo, 10.0 * lo),
        outer: monotonicity(r, &v, hi / 10.0, hi),
    })
}

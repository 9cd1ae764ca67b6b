use serde::{Deserialize, Serialize};

use crate::numerics::fit_slope;

use super::AnalysisError;

/// Spacing of the `ln A` lattice: ratio `2^{1/4}` in `A`.
pub const LATTICE_STEP: f64 = std::f64::consts::LN_2 / 4.0;
/// "Slightly smaller" exponents used by the induction.
pub const SHRINK: f64 = 0.99;

/// Parameters of `S(A) <= c [S(A^β) S^l(A^α) + A^{-ω}]` and the lattice
/// `ln A ∈ [ln_a_min, ln_a_max]` it is checked on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    pub alpha: f64,
    pub beta: f64,
    pub l: f64,
    pub omega: f64,
    pub c: f64,
    pub ln_a_min: f64,
    pub ln_a_max: f64,
}

/// Uniform bound `S(A) A^{ω₁} <= 1` over one induction block.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Block {
    pub ln_a_lo: f64,
    pub ln_a_hi: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RecurrenceVerdict {
    /// `S(A) <= C A^{-ω}` on the upper lattice with a non-growing `C`.
    Decays { constant: f64 },
    /// The conclusion fails although the premise held.
    NoDecay { constant_growth: f64 },
    /// The premise fails at arbitrarily large lattice points.
    PremiseViolated { ln_a: f64, lhs: f64, rhs: f64 },
    /// No `A₀` was found inside the lattice.
    NoStart,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub params: Recurrence,
    pub verdict: RecurrenceVerdict,
    /// Negative log-log slope of `S` over the upper half of the lattice.
    pub fitted_exponent: f64,
    /// `ln A₀`, where the sharpened inequality starts to hold.
    pub ln_a0: Option<f64>,
    pub omega1: Option<f64>,
    pub blocks: Vec<Block>,
    /// `ω₁, min{ω₁(β + lα), ω}, ...` up to `ω`.
    pub exponents: Vec<f64>,
}

/// Run the decay induction on the lattice. `s` takes `ln A` and returns
/// `S(A)`; it is evaluated on the lattice and at `α ln A`, `β ln A`.
pub fn recurrence_decay_check(s: &dyn Fn(f64) -> f64, params: Recurrence) -> Result<RecurrenceReport, AnalysisError> {
    let Recurrence { alpha, beta, l, omega, c, ln_a_min, ln_a_max } = params;
    let bad = |why: &'static str| Err(AnalysisError::Recurrence(why));
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return bad("α and β must lie in (0, 1)");
    }
    if !(l > 0.0 && omega > 0.0 && c > 0.0) {
        return bad("l, ω and c must be positive");
    }
    if l * alpha + beta <= 1.0 {
        return bad("needs lα + β > 1");
    }
    let (lm, wm) = (SHRINK * l, SHRINK * omega);
    if lm * alpha + beta <= 1.0 {
        return bad("lα + β too close to 1 for the shrunken l");
    }
    if !(ln_a_min > 0.0 && ln_a_max > ln_a_min) {
        return bad("lattice must satisfy 0 < ln A_min < ln A_max");
    }
    let n = ((ln_a_max - ln_a_min) / LATTICE_STEP).floor() as usize + 1;
    let x: Vec<f64> = (0..n).map(|k| ln_a_min + k as f64 * LATTICE_STEP).collect();
    let sv: Vec<f64> = x.iter().map(|&v| s(v)).collect();
    if sv.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(AnalysisError::Recurrence("S must be finite and nonnegative"));
    }
    // Lattice points whose arguments A^α, A^β are inside the lattice.
    let first = x.partition_point(|&v| v * alpha.min(beta) < ln_a_min);
    if first >= n {
        return Ok(report(params, RecurrenceVerdict::NoStart, &x, &sv, None, None, vec![], vec![]));
    }

    // Premise, required on the upper half of the checkable range.
    let rhs = |k: usize, ll: f64, w: f64, cc: f64| cc * (s(beta * x[k]) * s(alpha * x[k]).powf(ll) + (-w * x[k]).exp());
    let fails: Vec<usize> = (first..n).filter(|&k| sv[k] > rhs(k, l, omega, c) * (1.0 + 1e-12)).collect();
    let mid = first + (n - first) / 2;
    if let Some(&k) = fails.iter().rev().find(|&&k| k >= mid) {
        let v = RecurrenceVerdict::PremiseViolated { ln_a: x[k], lhs: sv[k], rhs: rhs(k, l, omega, c) };
        return Ok(report(params, v, &x, &sv, None, None, vec![], vec![]));
    }

    // A₀: the sharpened inequality holds from A₀ on and S < 1/2 from A₀^α on.
    let sharp_ok: Vec<bool> = (0..n).map(|k| k < first || sv[k] <= rhs(k, lm, wm, 0.5) * (1.0 + 1e-12)).collect();
    let mut tail_ok = vec![false; n + 1];
    tail_ok[n] = true;
    for k in (0..n).rev() {
        tail_ok[k] = tail_ok[k + 1] && sharp_ok[k];
    }
    let half_from = {
        let mut k = n;
        while k > 0 && sv[k - 1] < 0.5 {
            k -= 1;
        }
        k
    };
    let k0 = if half_from < n { (first..n).find(|&k| tail_ok[k] && alpha * x[k] >= x[half_from].max(ln_a_min)) } else { None };
    let Some(k0) = k0 else {
        return Ok(report(params, RecurrenceVerdict::NoStart, &x, &sv, None, None, vec![], vec![]));
    };
    let x0 = x[k0];

    // ω₁ from the starting block [A₀^α, A₀].
    let start = x.partition_point(|&v| v < alpha * x0);
    let mut omega1 = wm;
    for k in start..=k0 {
        if sv[k] > 0.0 {
            omega1 = omega1.min(-sv[k].ln() / x[k]);
        }
    }
    // Propagate over [A₀^{(1/β)^m}, A₀^{(1/β)^{m+1}}].
    let mut blocks = vec![];
    let (mut lo, mut hi) = (alpha * x0, x0);
    while lo < x[n - 1] {
        let max_ratio = (0..n)
            .filter(|&k| x[k] >= lo && x[k] <= hi)
            .map(|k| (sv[k].ln() + omega1 * x[k]).exp())
            .fold(0.0, f64::max);
        blocks.push(Block { ln_a_lo: lo, ln_a_hi: hi.min(x[n - 1]), max_ratio });
        lo = hi;
        hi /= beta;
    }
    let mut exponents = vec![omega1];
    while *exponents.last().unwrap() < omega && exponents.len() < 10_000 {
        let w = *exponents.last().unwrap();
        exponents.push((w * (beta + l * alpha)).min(omega));
    }

    // Conclusion: C(A) = S(A) A^ω does not grow over the upper lattice. Formed
    // in logs since A^ω alone overflows far out on the lattice.
    let cfun = |k: usize| (sv[k].ln() + omega * x[k]).exp();
    let split = (k0 + n) / 2;
    let lower = (k0..split.max(k0 + 1)).map(cfun).fold(0.0, f64::max);
    let upper = (split..n).map(cfun).fold(0.0, f64::max);
    let verdict = if blocks.iter().all(|b| b.max_ratio <= 1.0 + 1e-9) && upper <= 2.0 * lower.max(f64::MIN_POSITIVE) {
        RecurrenceVerdict::Decays { constant: upper.max(lower) }
    } else {
        RecurrenceVerdict::NoDecay { constant_growth: upper / lower.max(f64::MIN_POSITIVE) }
    };
    Ok(report(params, verdict, &x, &sv, Some(x0), Some(omega1), blocks, exponents))
}

#[allow(clippy::too_many_arguments)]
fn report(
    params: Recurrence,
    verdict: RecurrenceVerdict,
    x: &[f64],
    sv: &[f64],
    ln_a0: Option<f64>,
    omega1: Option<f64>,
    blocks: Vec<Block>,
    exponents: Vec<f64>,
) -> RecurrenceReport {
    let h = x.len() / 2;
    let pts: Vec<(f64, f64)> = x[h..].iter().zip(&sv[h..]).filter(|(_, s)| **s > 0.0).map(|(a, s)| (*a, s.ln())).collect();
    let fitted_exponent = if pts.len() > 2 {
        let (a, b): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        -fit_slope(&a, &b)
    } else {
        f64::NAN
    };
    RecurrenceReport { params, verdict, fitted_exponent, ln_a0, omega1, blocks, exponents }
}

use num::rational::Rational64;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::AnalysisError;

type Q = Rational64;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Exact rational for a decimal exponent such as `4.5`.
pub fn rational(x: f64) -> Result<Q, AnalysisError> {
    Q::approximate_float(x).filter(|r| (r.to_f64().unwrap() - x).abs() <= 1e-12 * x.abs().max(1.0)).ok_or(AnalysisError::NotRational(x))
}

/// `s_p = 3/2 - 2/(p-1)`.
pub fn critical_exponent(p: Q) -> Result<Q, AnalysisError> {
    if p <= Q::one() {
        return Err(AnalysisError::Exponent { p: p.to_f64().unwrap(), range: "p > 1" });
    }
    Ok(q(3, 2) - q(2, 1) / (p - Q::one()))
}

/// Exponent of a Lebesgue norm, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(Q),
    Infinite,
}

impl Exponent {
    pub fn recip(self) -> Q {
        match self {
            Exponent::Finite(x) => x.recip(),
            Exponent::Infinite => Q::zero(),
        }
    }
    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Finite(x) => x.to_f64().unwrap(),
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

/// The space-time norms `L^q_t L^r_x` used by the theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    /// `L^{2(p-1)} L^{2(p-1)}`.
    S,
    /// `L^4 L^4`.
    W,
    /// `L^{2/(s+1)} L^{2/(2-s)}`.
    Z { s: f64 },
    /// `L^{2p/(s+1-(2p-2)(s-s_p))} L^{2p/(2-s)}`.
    Y { s: f64 },
    #[serde(rename = "lqlr")]
    LqLr { q: f64, r: f64 },
}

impl NormKind {
    /// Exact `(q, r)` for exponent `p`.
    pub fn exponents_exact(&self, p: Q) -> Result<(Q, Q), AnalysisError> {
        let one = Q::one();
        let two = q(2, 1);
        let check = |den: Q, what: &'static str| {
            if den.is_positive() {
                Ok(())
            } else {
                Err(AnalysisError::Singular { what, p: p.to_f64().unwrap() })
            }
        };
        match *self {
            NormKind::S => Ok((two * (p - one), two * (p - one))),
            NormKind::W => Ok((q(4, 1), q(4, 1))),
            NormKind::Z { s } => {
                let s = rational(s)?;
                check(s + one, "time exponent")?;
                check(two - s, "space exponent")?;
                Ok((two / (s + one), two / (two - s)))
            }
            NormKind::Y { s } => {
                let s = rational(s)?;
                let sp = critical_exponent(p)?;
                let dt = s + one - (two * p - two) * (s - sp);
                check(dt, "time exponent")?;
                check(two - s, "space exponent")?;
                Ok((two * p / dt, two * p / (two - s)))
            }
            NormKind::LqLr { q: a, r: b } => {
                if !(a >= 1.0 && b >= 1.0) {
                    return Err(AnalysisError::Singular { what: "Lebesgue exponent", p: p.to_f64().unwrap() });
                }
                Ok((rational(a)?, rational(b)?))
            }
        }
    }

    pub fn exponents(&self, p: f64) -> Result<(f64, f64), AnalysisError> {
        let (a, b) = self.exponents_exact(rational(p)?)?;
        Ok((a.to_f64().unwrap(), b.to_f64().unwrap()))
    }
}

/// Outcome of [`admissibility_check`], with the quantities compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub in_range: bool,
    /// `1/q + 1/r`, required `<= 1/2`.
    pub sum: Q,
    /// `1/q + 3/r`, required `= 3/2 - s + ρ`.
    pub scaling_lhs: Q,
    pub scaling_rhs: Q,
    pub admissible: bool,
}

pub fn admissibility_check(qe: Exponent, re: Exponent, s: Q, rho: Q) -> Admissibility {
    let at_least_two = |e: Exponent| match e {
        Exponent::Finite(x) => x >= q(2, 1),
        Exponent::Infinite => true,
    };
    let in_range = at_least_two(qe) && at_least_two(re);
    let sum = qe.recip() + re.recip();
    let scaling_lhs = qe.recip() + q(3, 1) * re.recip();
    let scaling_rhs = q(3, 2) - s + rho;
    Admissibility { in_range, sum, scaling_lhs, scaling_rhs, admissible: in_range && sum <= q(1, 2) && scaling_lhs == scaling_rhs }
}

/// The interpolation pair: `κ = 1 - 3/p` and the `s`-admissible `(q, r)`
/// with `Y_s` between `L^∞ L^{6/(3-2s)}` (weight `κ`) and `L^q L^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationPair {
    pub kappa: Q,
    pub q: Q,
    pub r: Q,
    pub admissibility: Admissibility,
}

pub fn interpolation_kappa(p: Q, s: Q) -> Result<InterpolationPair, AnalysisError> {
    if !(p > q(3, 1) && p <= q(5, 1)) {
        return Err(AnalysisError::Exponent { p: p.to_f64().unwrap(), range: "3 < p <= 5" });
    }
    let sp = critical_exponent(p)?;
    if !(s >= sp && s < Q::one()) {
        return Err(AnalysisError::Regularity { s: s.to_f64().unwrap(), lo: sp.to_f64().unwrap() });
    }
    let kappa = Q::one() - q(3, 1) / p;
    let inv_q = (s + Q::one() - (q(2, 1) * p - q(2, 1)) * (s - sp)) / q(6, 1);
    let inv_r = (q(2, 1) - s) / q(6, 1) - kappa / (Q::one() - kappa) * (q(3, 1) - q(2, 1) * s) / q(6, 1);
    if !(inv_q.is_positive() && inv_r.is_positive()) {
        return Err(AnalysisError::Singular { what: "interpolation pair", p: p.to_f64().unwrap() });
    }
    let admissibility = admissibility_check(Exponent::Finite(inv_q.recip()), Exponent::Finite(inv_r.recip()), s, Q::zero());
    Ok(InterpolationPair { kappa, q: inv_q.recip(), r: inv_r.recip(), admissibility })
}

/// The regularity constants of the argument, exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentReport {
    pub p: Q,
    pub s_p: Q,
    /// `3 min{p-3, 1} / (2p)`.
    pub sigma: Q,
    /// `κ/6`.
    pub sigma1: Q,
    /// `min{σ/3, σ₁, 3/5}`.
    pub sigma2: Q,
    pub kappa: Q,
    /// `β` with `(1 - ε₁) β = 2/3`, `ε₁ = 1/10000`.
    pub beta: Q,
    /// The interpolation pair at `s = s_p`.
    pub pair: InterpolationPair,
    /// `(2(p-1), 2(p-1))`, checked `s_p`-admissible.
    pub s_pair: Admissibility,
}

impl ExponentReport {
    /// Next regularity `min{1, s + (99/100) σ₂}`.
    pub fn next_regularity(&self, s: Q) -> Q {
        (s + q(99, 100) * self.sigma2).min(Q::one())
    }

    /// Values in floating point, keyed by name, for JSON output.
    pub fn to_json(&self) -> serde_json::Value {
        let f = |x: Q| x.to_f64().unwrap();
        serde_json::json!({
            "p": f(self.p),
            "s_p": f(self.s_p),
            "s_p_exact": self.s_p.to_string(),
            "sigma": f(self.sigma),
            "sigma1": f(self.sigma1),
            "sigma2": f(self.sigma2),
            "kappa": f(self.kappa),
            "beta": f(self.beta),
            "interpolation_pair": { "q": f(self.pair.q), "r": f(self.pair.r), "admissible": self.pair.admissibility.admissible },
            "s_pair_admissible": self.s_pair.admissible,
        })
    }
}

pub fn regularity_constants(p: Q) -> Result<ExponentReport, AnalysisError> {
    if !(p > q(3, 1) && p < q(5, 1)) {
        return Err(AnalysisError::Exponent { p: p.to_f64().unwrap(), range: "3 < p < 5" });
    }
    let s_p = critical_exponent(p)?;
    let sigma = q(3, 1) * (p - q(3, 1)).min(Q::one()) / (q(2, 1) * p);
    let kappa = Q::one() - q(3, 1) / p;
    let sigma1 = kappa / q(6, 1);
    let sigma2 = (sigma / q(3, 1)).min(sigma1).min(q(3, 5));
    let beta = q(2, 3) / (Q::one() - q(1, 10000));
    let pair = interpolation_kappa(p, s_p)?;
    let sq = q(2, 1) * (p - Q::one());
    let s_pair = admissibility_check(Exponent::Finite(sq), Exponent::Finite(sq), s_p, Q::zero());
    Ok(ExponentReport { p, s_p, sigma, sigma1, sigma2, kappa, beta, pair, s_pair })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_exponents_are_exact() {
        assert_eq!(rational(4.5).unwrap(), q(9, 2));
    }

    #[test]
    fn z_exponents() {
        let (a, b) = NormKind::Z { s: 0.5 }.exponents_exact(q(4, 1)).unwrap();
        assert_eq!((a, b), (q(4, 3), q(4, 3)));
    }

    #[test]
    fn singular_y_exponent() {
        // s + 1 - 6(s - 5/6) = 0 at s = 6/5, outside the range but finite.
        assert!(NormKind::Y { s: 1.2 }.exponents_exact(q(4, 1)).is_err());
    }
}

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// `g(β) = ½[(3/2)^{1-β} + (1/2)^{1-β}]`.
pub fn g(beta: f64) -> f64 {
    0.5 * (1.5f64.powf(1.0 - beta) + 0.5f64.powf(1.0 - beta))
}

/// `log₂(2/(1 + g(β)))`.
pub fn ladder_increment(beta: f64) -> f64 {
    (2.0 / (1.0 + g(beta))).log2()
}

pub const LADDER_TARGET: f64 = 1.0 - 1e-6;
pub const LADDER_MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderState {
    pub p: f64,
    pub beta: Vec<f64>,
    pub g: Vec<f64>,
    pub increments: Vec<f64>,
    pub reached: bool,
}

impl LadderState {
    pub fn steps(&self) -> usize {
        self.beta.len() - 1
    }

    /// CSV `n,beta,g,increment`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,beta,g,increment\n");
        for (n, ((b, g), d)) in self.beta.iter().zip(&self.g).zip(&self.increments).enumerate() {
            let _ = writeln!(s, "{n},{b},{g},{d}");
        }
        s
    }
}

/// `β_{n+1} = β_n + log₂(2/(1 + g(β_n)))` from `β₀ ∈ [2/(p-1), 1)` until
/// `1 - 1e-6` or the step cap.
pub fn decay_ladder(p: f64, beta0: f64) -> Result<LadderState, AnalysisError> {
    if !(p > 3.0 && p <= 5.0) {
        return Err(AnalysisError::Exponent { p, range: "3 < p <= 5" });
    }
    let lo = 2.0 / (p - 1.0);
    if !(beta0 >= lo - 1e-15 && beta0 < 1.0) {
        return Err(AnalysisError::Ladder { beta0, lo });
    }
    let mut st = LadderState { p, beta: vec![beta0], g: vec![g(beta0)], increments: vec![ladder_increment(beta0)], reached: false };
    while st.steps() < LADDER_MAX_STEPS {
        let b = *st.beta.last().unwrap();
        if b >= LADDER_TARGET {
            st.reached = true;
            break;
        }
        let next = (b + ladder_increment(b)).min(1.0);
        st.beta.push(next);
        st.g.push(g(next));
        st.increments.push(ladder_increment(next));
    }
    Ok(st)
}

/// `g` on `n` interior lattice points of `(0, 1)`: the largest value and
/// the smallest second difference (convexity needs it `>= 0`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GShape {
    pub max_interior: f64,
    pub min_second_difference: f64,
    pub g0: f64,
    pub g1: f64,
}

impl GShape {
    pub fn holds(&self) -> bool {
        self.max_interior < 1.0 && self.min_second_difference >= 0.0 && (self.g0 - 1.0).abs() < 1e-15 && (self.g1 - 1.0).abs() < 1e-15
    }
}

pub fn g_shape(n: usize) -> GShape {
    let h = 1.0 / (n + 1) as f64;
    let vals: Vec<f64> = (0..n + 2).map(|i| g(i as f64 * h)).collect();
    GShape {
        max_interior: vals[1..=n].iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_second_difference: vals.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min),
        g0: vals[0],
        g1: vals[n + 1],
    }
}

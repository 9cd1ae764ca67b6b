use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldPair;
use crate::grid::RadialGrid;

use super::{FreeWave, LinearError};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error("exterior region r > {a} leaves the grid (r_max = {r_max})")]
    OutsideGrid { a: f64, r_max: f64 },
    #[error("times must be positive")]
    NonPositiveTime,
    #[error("neither time direction satisfies the channel bound (worst margins {forward:e} / {backward:e})")]
    Failed { forward: f64, backward: f64, report: Box<ChannelReport> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of a channel check. `margins` belong to `direction`; their
/// times carry its sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub direction: Direction,
    pub margins: Vec<Margin>,
    pub worst_margin: f64,
    /// Worst margins of both directions, `[forward, backward]`.
    pub both: [f64; 2],
}

/// Energy of the free evolution at time `t` outside the ball of radius
/// `R + |t|`.
pub fn exterior_energy(f: &FieldPair, t: f64, big_r: f64) -> Result<f64, ChannelError> {
    let wave = FreeWave::new(f)?;
    exterior_energy_of(&wave, t, big_r)
}

fn exterior_energy_of(wave: &FreeWave, t: f64, big_r: f64) -> Result<f64, ChannelError> {
    let a = big_r + t.abs();
    let r_max = wave.grid().r_max();
    if a >= r_max {
        return Err(ChannelError::OutsideGrid { a, r_max });
    }
    if wave.support_end() + t.abs() > r_max * (1.0 + 1e-12) {
        return Err(LinearError::Truncated { support_end: wave.support_end(), t, r_max }.into());
    }
    Ok(wave.exterior_energy(a, t))
}

/// Check that the exterior energy at `±t` dominates
/// `2π ∫_R^∞ (w_r² + w_t²) dr` at time zero, for every `t` in `times`, in
/// at least one of the two time directions.
///
/// The tolerance is `1e-8 · max(1, rhs)`. Ties go to the forward direction.
pub fn channel_check(f: &FieldPair, big_r: f64, times: &[f64]) -> Result<ChannelReport, ChannelError> {
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(ChannelError::NonPositiveTime);
    }
    let wave = FreeWave::new(f)?;
    let rhs = std::f64::consts::PI * 2.0 * wave.energy_1d(big_r, 0.0);
    let tol = 1e-8 * rhs.max(1.0);
    let run = |sign: f64| -> Result<(Vec<Margin>, f64), ChannelError> {
        let mut margins = Vec::with_capacity(times.len());
        let mut worst = f64::INFINITY;
        for &t in times {
            let lhs = exterior_energy_of(&wave, sign * t, big_r)?;
            worst = worst.min(lhs - rhs);
            margins.push(Margin { t: sign * t, lhs, rhs });
        }
        Ok((margins, if times.is_empty() { 0.0 } else { worst }))
    };
    let (fwd, fwd_worst) = run(1.0)?;
    let (bwd, bwd_worst) = run(-1.0)?;
    let both = [fwd_worst, bwd_worst];
    let pick = |direction, margins, worst_margin| ChannelReport { r: big_r, direction, margins, worst_margin, both };
    let forward_ok = fwd_worst >= -tol;
    let backward_ok = bwd_worst >= -tol;
    if forward_ok && (!backward_ok || fwd_worst >= bwd_worst) {
        Ok(pick(Direction::Forward, fwd, fwd_worst))
    } else if backward_ok {
        Ok(pick(Direction::Backward, bwd, bwd_worst))
    } else {
        Err(ChannelError::Failed {
            forward: fwd_worst,
            backward: bwd_worst,
            report: Box::new(pick(Direction::Forward, fwd, fwd_worst)),
        })
    }
}

/// Smooth bump supported on `[a, b]`.
pub fn bump(r: f64, a: f64, b: f64) -> f64 {
    let x = (2.0 * r - a - b) / (b - a);
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Random sum of one to three smooth bumps for each of `u₀` and `u₁`,
/// all supported in `[0.2, max_radius]`.
pub fn random_compact_data<R: Rng>(rng: &mut R, grid: Arc<RadialGrid>, max_radius: f64) -> FieldPair {
    let pieces = |rng: &mut R| -> Vec<(f64, f64, f64)> {
        let k = rng.gen_range(1..=3);
        (0..k)
            .map(|_| {
                let a = rng.gen_range(0.2..max_radius - 0.8);
                let b = rng.gen_range(a + 0.8..=max_radius.min(a + 3.0));
                (a, b, rng.gen_range(-2.0..2.0))
            })
            .collect()
    };
    let p0 = pieces(rng);
    let p1 = pieces(rng);
    let eval = |p: &[(f64, f64, f64)], r: f64| p.iter().map(|&(a, b, c)| c * bump(r, a, b)).sum::<f64>();
    FieldPair::from_fn(grid, |r| eval(&p0, r), |r| eval(&p1, r))
}

/// One case of [`channel_suite`].
#[derive(Debug, Clone, Serialize)]
pub struct SuiteCase {
    pub index: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub report: Option<ChannelReport>,
    pub error: Option<String>,
    /// Direction selected for the time-reversed data.
    pub reversed: Option<Direction>,
}

/// Times probed by the randomized suite.
pub const SUITE_TIMES: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];

/// Channel checks on `samples` seeded random data sets on `[0, 16]` with
/// step `1/256`, `R` uniform in `[0.5, 2]`.
pub fn channel_suite(seed: u64, samples: usize) -> Vec<SuiteCase> {
    let grid = Arc::new(RadialGrid::uniform_from_origin(16.0, 1.0 / 256.0).expect("valid grid"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|index| {
            let data = random_compact_data(&mut rng, grid.clone(), 6.0);
            let big_r = rng.gen_range(0.5..=2.0);
            let reversed = channel_check(&data.reversed(), big_r, &SUITE_TIMES).ok().map(|r| r.direction);
            match channel_check(&data, big_r, &SUITE_TIMES) {
                Ok(report) => SuiteCase { index, r: big_r, report: Some(report), error: None, reversed },
                Err(e) => SuiteCase { index, r: big_r, report: None, error: Some(e.to_string()), reversed },
            }
        })
        .collect()
}

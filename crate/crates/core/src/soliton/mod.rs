//! Stationary solutions of `-ΔW = |W|^{p-1} W`: the tail fixed point, the
//! inward extension, the explicit families and the diagnostics that tell a
//! singular profile from a regular one.

mod diagnostics;
mod extend;
mod profile;
mod tail;
mod truncated;

use thiserror::Error;

use crate::grid::GridError;

pub use diagnostics::{soliton_diagnostics, v_profile, Diagnostics, DyadicPiece, Monotonicity};
pub use extend::{extend_inward, extend_inward_report, lyapunov, LyapunovReport, RTOL};
pub use profile::{aubin_talenti, aubin_talenti_value, explicit_singular, log_grid, singular_constant, Provenance, SolitonProfile};
pub use tail::{contraction_bound, default_tail_radius, tail_fixed_point, tail_fixed_point_with, TailOptions, TailProfile};
pub use truncated::{truncated_soliton, v_r_scaling, ScalingFit, TruncatedSoliton, VrNorms};

#[derive(Debug, Error)]
pub enum SolitonError {
    #[error("exponent p = {p} outside {range}")]
    Exponent { p: f64, range: &'static str },
    #[error("singular profile needs r_min > 0")]
    Origin,
    #[error("scale must be positive, got {0}")]
    Scale(f64),
    #[error("invalid radius {0}")]
    Radius(f64),
    #[error("tail map contraction bound {bound:.3} at R = {r} is not below 1/2; raise R (try R >= {suggested})")]
    WeakContraction { bound: f64, r: f64, suggested: f64 },
    #[error("fixed point not reached after {iterations} iterations (last change {change:.3e})")]
    NotConverged { iterations: usize, change: f64 },
    #[error("inward integration failed: {0}")]
    Integrator(String),
    #[error("Lyapunov quantity increased by {increase:.3e} (relative) near r = {r}")]
    Lyapunov { r: f64, increase: f64 },
    #[error("profile spans {decades:.2} decades, need at least {needed}")]
    Range { decades: f64, needed: f64 },
    #[error("R = {r} is below the profile range starting at {r_min}")]
    BelowProfile { r: f64, r_min: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Tail fixed point at `R` followed by inward extension to `r_min`.
pub fn construct(p: f64, big_r: f64, r_min: f64, tol: f64) -> Result<SolitonProfile, SolitonError> {
    let tail = tail_fixed_point(p, big_r, tol)?;
    extend_inward(&tail, r_min)
}

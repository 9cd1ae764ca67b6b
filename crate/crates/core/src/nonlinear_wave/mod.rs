//! Radial semilinear evolution `u_tt - Δu = ±|u|^{p-1} u`.
//!
//! The default scheme is leapfrog (velocity Verlet) on `u`; an independent
//! characteristic-lattice scheme on `w = r u` serves as a cross-check.

mod classify;
mod config;
mod evolve;
mod morawetz;
mod perturb;

pub use classify::{blowup_time_study, classify, BlowupStudy, Verdict};
pub use config::{EvolutionConfig, Forcing, Scheme, Sign, Status, Trajectory, TrajectoryError};
pub use evolve::{energy, evolve, manufactured_forcing, manufactured_truth, EvolveError};
pub use morawetz::{morawetz_report, MorawetzError, MorawetzReport};
pub use perturb::{
    perturbation_scaling, perturbed_evolve, support_radius, support_radius_track, Background, PerturbError,
    PerturbationReport, RadiusSample,
};

/// `F(u) = σ |u|^{p-1} u` with `σ = +1` focusing, `-1` defocusing.
pub fn nonlinearity(u: f64, p: f64, sign: Sign) -> f64 {
    sign.sigma() * u.abs().powf(p - 1.0) * u
}

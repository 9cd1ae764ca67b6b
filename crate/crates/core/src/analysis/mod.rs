//! Space-time norms, the exponent calculators of the scattering argument,
//! the abstract recurrence-decay checker and the decay-exponent ladder.

mod exponents;
mod fbeta;
mod ladder;
mod norms;
mod recurrence;

use thiserror::Error;

pub use exponents::{
    admissibility_check, critical_exponent, interpolation_kappa, rational, regularity_constants, Admissibility, Exponent,
    ExponentReport, InterpolationPair, NormKind,
};
pub use fbeta::{fbeta_profile, fbeta_samples, FBetaProfile};
pub use ladder::{decay_ladder, g, g_shape, ladder_increment, GShape, LadderState, LADDER_MAX_STEPS, LADDER_TARGET};
pub use norms::{radial_lebesgue, spacetime_norm, spacetime_norm_samples, spacetime_norms, NormValue};
pub use recurrence::{recurrence_decay_check, Block, Recurrence, RecurrenceReport, RecurrenceVerdict, LATTICE_STEP, SHRINK};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("exponent p = {p} outside {range}")]
    Exponent { p: f64, range: &'static str },
    #[error("regularity s = {s} outside [{lo}, 1)")]
    Regularity { s: f64, lo: f64 },
    #[error("{what} is singular at p = {p}")]
    Singular { what: &'static str, p: f64 },
    #[error("{0} has no exact rational form")]
    NotRational(f64),
    #[error("time window holds {samples} samples, need at least 2")]
    Window { samples: usize },
    #[error("recurrence parameters: {0}")]
    Recurrence(&'static str),
    #[error("ladder start {beta0} outside [{lo}, 1)")]
    Ladder { beta0: f64, lo: f64 },
}

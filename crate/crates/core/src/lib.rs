//! Numerical laboratory for the radial nonlinear wave equation
//! `u_tt - Δu = ±|u|^{p-1} u` in three space dimensions, `3 < p <= 5`.
//!
//! Fields are radial and sampled on a [`RadialGrid`]. The crate provides
//! exact linear propagation through the `w = r u` reduction, a nonlinear
//! solver, fractional Sobolev and space-time norms, the singular soliton
//! construction, and numeric checkers for the recurrence and exponent
//! ladders that govern the scattering argument.

pub mod analysis;
pub mod field;
pub mod grid;
pub mod linear_wave;
pub mod nonlinear_wave;
pub mod numerics;
pub mod soliton;
pub mod spectral;

pub use field::{FieldError, FieldPair, OriginRule, ReducedPair};
pub use grid::{GridError, RadialGrid, Spacing};

/// Critical regularity `s_p = 3/2 - 2/(p-1)`.
pub fn critical_index(p: f64) -> f64 {
    1.5 - 2.0 / (p - 1.0)
}

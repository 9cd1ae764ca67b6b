//! Exact linear propagation of radial waves.
//!
//! With `w = r u` the radial wave equation becomes the flat one-dimensional
//! equation `w_tt - w_rr = h` on the half line with `w(0, t) = 0`. Extending
//! the data oddly across `r = 0` turns this into a whole-line problem solved
//! by d'Alembert's formula. Writing
//!
//! `F = w̃₀' + w̃₁` and `G = w̃₀' - w̃₁`
//!
//! the free solution has `w_t + w_r = F(r + t)` and `w_r - w_t = G(r - t)`,
//! and the odd extension gives `G(-x) = F(x)`.

mod channel;
mod duhamel;
mod propagation;
mod transport;

pub use channel::{
    bump, channel_check, channel_suite, exterior_energy, random_compact_data, ChannelError, ChannelReport, Direction,
    Margin, SuiteCase, SUITE_TIMES,
};
pub use duhamel::{duhamel_integrate, SampledSource, SpaceTimeSource};
pub use propagation::{free_propagate, huygens_support, CharacteristicFields, FreeWave, LinearError, Support};
pub use transport::{transport_residual, AnalyticHistory, ReducedHistory, TransportReport, Which};

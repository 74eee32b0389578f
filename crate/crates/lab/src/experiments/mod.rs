//! One function per experiment kind. Each writes its ledgers through
//! [`Artifacts`](crate::manifest::Artifacts) and records its checks there.

mod basic;
mod search;

pub use basic::{balanced, dirichlet, expansion_order, profiles, spectrum, variation_check};
pub use search::{descend, diagnose, mountain_pass, strong_minmax};

/// Relative error guarded against a vanishing reference.
pub(crate) fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

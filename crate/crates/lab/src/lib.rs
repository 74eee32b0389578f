//! Reproducible experiment runs over `aclab-core`: configuration, execution,
//! convergence sweeps and hash-indexed output.

pub mod config;
pub mod emit;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod run;
pub mod sweep;

pub use config::{Kind, Overrides, RunConfig};
pub use error::{LabError, Result};
pub use manifest::Manifest;
pub use run::run;

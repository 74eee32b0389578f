//! Allen–Cahn phase transitions on model manifolds: one-dimensional profiles,
//! hypersurface geometry, Dirichlet problems on the two sides of a separating
//! hypersurface, the balanced energy, its variations, and min–max tools.

pub mod error;
pub mod elliptic;
pub mod energy;
pub mod geometry;
pub mod linalg;
pub mod minmax;
pub mod numerics;
pub mod profiles1d;
pub mod variation;

pub use error::{Error, Result};

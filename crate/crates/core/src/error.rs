use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular linear system at row {row} (pivot {pivot:e}); resolution too coarse or operator degenerate")]
    Singular { row: usize, pivot: f64 },

    #[error("profile does not decay: estimated truncation {estimate:e} at z_max = {z_max}")]
    UnresolvedDecay { z_max: f64, estimate: f64 },

    #[error("epsilon = {eps} is outside (0, 1); cutoff bands are empty")]
    CutoffBand { eps: f64 },

    #[error("warp parameters a = {a}, b = {b} do not satisfy a > b >= 0")]
    DegenerateWarp { a: f64, b: f64 },

    #[error("graph leaves the admissible neighbourhood: sup |f| = {sup} exceeds {limit}")]
    OutsideChart { sup: f64, limit: f64 },

    #[error("hypersurface is not minimal (|H| = {mean_curvature:e})")]
    NotMinimal { mean_curvature: f64 },

    #[error("under-resolved interface: spacing {spacing:e} exceeds eps/8 = {limit:e}")]
    UnderResolved { spacing: f64, limit: f64 },

    #[error("epsilon = {eps} violates the solvability threshold lambda_1^(-1/2) = {threshold}; only u = 0 exists")]
    Threshold { eps: f64, threshold: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("solution left the positive basin (min value {min:e})")]
    WrongBasin { min: f64 },

    #[error("saddle lost: polished field has no sign change")]
    SaddleLost,

    #[error("line search collapsed below {step:e}; state is near-critical")]
    StepCollapse { step: f64 },

    #[error("finite-difference extrapolation disagrees by {relative:e} (relative); step too large")]
    StepTooLarge { relative: f64 },

    #[error("family escapes the admissible neighbourhood: sup |f| = {sup} exceeds {limit}")]
    Escaped { sup: f64, limit: f64 },

    #[error("not supported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

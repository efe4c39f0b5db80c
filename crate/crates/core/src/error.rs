use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("cutoff infeasible: transition needs width {needed:.4} but only {available:.4} is available below the plateau")]
    InfeasibleCutoff { needed: f64, available: f64 },

    #[error("invalid cutoff parameters: {0}")]
    InvalidCutoff(String),

    /// The vertical stretching has reached zero somewhere: the surface left the chart.
    #[error("degenerate graph map: min d3(phi) = {min_jacobian:.3e} at t = {t:.6}")]
    DegenerateMap { min_jacobian: f64, t: f64 },

    #[error("elliptic solve did not converge after {iterations} iterations (residual {residual:.3e}, target {target:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("insufficient history: need {needed} states, have {available}")]
    InsufficientHistory { needed: usize, available: usize },

    #[error("history times are not uniformly spaced")]
    NonUniformHistory,

    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),

    #[error("time step {dt:.4e} violates the stability bound; use dt <= {suggested:.4e}")]
    CflViolation { dt: f64, suggested: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("field dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

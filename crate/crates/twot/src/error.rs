use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rank deficient span: numerical rank {rank}, need at least {required}")]
    RankDeficient { rank: usize, required: usize },
    #[error("states belong to different constellations")]
    ConstellationMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vector has weight {weight:.3e} outside the Gram support")]
    OutsideSupport { weight: f64 },
    #[error("truncation insufficient: achieved {achieved:.3e}, required {required:.3e}")]
    Truncation { achieved: f64, required: f64 },
    #[error("solver did not converge after {iterations} iterations (primal {primal:.2e}, dual {dual:.2e}, gap {gap:.2e})")]
    SolverFailure {
        iterations: usize,
        primal: f64,
        dual: f64,
        gap: f64,
    },
    #[error("fidelity decreased by {drop:.3e} at iteration {iteration}")]
    NonMonotone { iteration: usize, drop: f64 },
    #[error("linear algebra failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

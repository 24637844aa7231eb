use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph has no filled cells")]
    EmptyGraph,

    #[error("response is constant; logistic fit is undefined")]
    ConstantResponse,

    #[error("degenerate design: predictor `{0}` is collinear with the others")]
    DegenerateDesign(String),

    #[error("BiCM did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("ensemble too large to enumerate: {0}")]
    TooLarge(String),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("undecidable edge: estimated p-value equals the per-test threshold {0}")]
    Undecidable(f64),

    #[error("could not reach density {target} after {attempts} attempts (last {realized})")]
    UnattainableDensity {
        target: f64,
        realized: f64,
        attempts: usize,
    },
}

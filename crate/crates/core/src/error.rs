use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AipError {
    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    #[error("singular map (det = {det})")]
    SingularMap { det: f64 },

    #[error("map is not volume preserving: |det| = {det}")]
    NotUnimodular { det: f64 },

    #[error("invalid radius {0}: must be at least 1")]
    InvalidRadius(f64),

    #[error("truncation radius {truncation} is smaller than the required {required}")]
    TruncationTooSmall { required: f64, truncation: f64 },

    #[error("degenerate weights: only {hits} samples with positive overlap (need {required})")]
    DegenerateWeights { hits: usize, required: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("optimization did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, AipError>;

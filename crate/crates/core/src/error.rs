use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{sites} sites exceed the limit of {max} for this path")]
    TooLarge { sites: usize, max: usize },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("Lanczos did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid sites: {0}")]
    InvalidSites(String),

    #[error("non-physical state: {0}")]
    InvalidState(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid field grid: {0}")]
    InvalidGrid(String),

    #[error("detector failed: {0}")]
    Detector(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate design")]
    DegenerateDesign,

    #[error("divergence: non-finite iterate at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("ill-posed, increase lambda")]
    IllPosed,

    #[error("no admissible hyperparameters")]
    NoAdmissibleHyperparameters,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(what: &str, expected: usize, got: usize) -> Error {
    Error::DimensionMismatch(format!("{what}: expected {expected}, got {got}"))
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("layout conflict: {0}")]
    LayoutConflict(String),
    #[error("layout error: {0}")]
    Layout(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("amplitude singularity: {0}")]
    Singularity(String),
    #[error("insufficient span: {0}")]
    InsufficientSpan(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("binning mismatch: {0}")]
    BinMismatch(String),
    #[error("too few counts: {0}")]
    TooFewCounts(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

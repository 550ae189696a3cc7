use thiserror::Error;

/// Errors raised by the estimators and their input validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("shape error: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("degenerate range in dimension {dim}: all values equal {value}")]
    DegenerateRange { dim: usize, value: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(
        "tied coordinates in dimension {dim}: divide-and-conquer needs pairwise distinct \
         values per dimension (jitter or deduplicate the sample, or enable tie breaking)"
    )]
    Ties { dim: usize },

    #[error(
        "exponent range too large in dimension {dim}: span/h = {ratio:.1} exceeds {limit} \
         (increase the bandwidth or rescale the data)"
    )]
    Range { dim: usize, ratio: f64, limit: f64 },

    #[error("linear algebra: {0}")]
    Linalg(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("forms share a common factor (resultant is zero)")]
    ZeroResultant,
    #[error("unsupported degree {0} (expected {1})")]
    UnsupportedDegree(usize, usize),
    #[error("pairing on the diagonal is +infinity at classical points")]
    DiagonalPairing,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("oracle radius {0} exceeds the limit {1}")]
    RadiusTooLarge(usize, usize),
    #[error("search box contains no admissible points")]
    EmptySearch,
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

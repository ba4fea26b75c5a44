use thiserror::Error;

/// Errors surfaced by the engine. Validation-style checks return report
/// lists instead; these are the hard failures.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("sign consistency failure: {0}")]
    SignConsistency(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-integer invariant dimension: {0}")]
    NonIntegerInvariant(String),

    #[error("assembly without a passing degeneration certificate: {0}")]
    Uncertified(String),

    #[error("mismatched truncation: {0}")]
    MismatchedTruncation(String),

    #[error("{0}")]
    Input(String),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("expected {expected} studies, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The requested `(n, r)` falls outside the regime where the formula holds.
    #[error("regime error: {0}")]
    Regime(String),
}

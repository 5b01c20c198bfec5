use thiserror::Error;

/// Errors raised while validating inputs or compiling networks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inputs that violate a structural precondition (mismatched C, N, d, bad radii, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// A vector or matrix had the wrong length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    /// An enumeration or construction would exceed its budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

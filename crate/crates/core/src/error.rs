//! Error types shared across the crate.

use thiserror::Error;

/// Unified error type for all fallible operations in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range (negative width, zero
    /// samples, margin larger than the particle cutoff, and so on).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two objects that must share a discretization (grid, mode set, basis)
    /// do not.
    #[error("incompatible shapes: {0}")]
    Shape(String),

    /// A requested computation would exceed the configured capacity limits.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Configuration file could not be parsed or failed validation.
    #[error("configuration error: {0}")]
    Config(String),

    /// An internal consistency check failed (e.g. a matrix that must be
    /// Hermitian is not, beyond round-off).
    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// I/O failure while reading configs or writing results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Capacity(_) => 3,
            _ => 1,
        }
    }
}

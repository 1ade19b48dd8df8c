//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Library-level error type. Variants map onto the CLI exit codes:
/// configuration problems exit 2, numerical failures exit 3 and
/// acceptance/selftest failures exit 4.
#[derive(Debug, Error)]
pub enum NfError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("operator belongs to a different model ({0})")]
    ModelMismatch(String),

    #[error("resonance violation: {0}")]
    ResonanceViolation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NfError>;

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map onto the process exit codes used by the CLI:
/// `Config`, `Parse` and `Lookup` are caller mistakes (exit 2),
/// `Contract` and `Leakage` are invariant violations (exit 3),
/// everything else is an unexpected failure (exit 1).
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes do not line up for the requested operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An operation was called outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid configuration value supplied by the caller.
    #[error("invalid config: {0}")]
    Config(String),

    /// A keyed lookup (e.g. sentiment sidecar by record id) found nothing.
    #[error("lookup failed: {0}")]
    Lookup(String),

    /// Input file could not be parsed; carries a 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Validation or test records leaked into a training fold.
    #[error("leakage detected: {0}")]
    Leakage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("site {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("capacity exceeded: {what} (requested {requested}, cap {cap})")]
    Capacity { what: &'static str, requested: usize, cap: usize },
    #[error("measurement branch with outcome {outcome} has zero probability")]
    ImpossibleBranch { outcome: u8 },
    #[error("storage model violation: {0}")]
    ModelViolation(String),
    #[error("puzzle integrity error: {0}")]
    Integrity(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("garbled circuit corruption: {0}")]
    Corruption(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("protocol aborted: {0}")]
    ProtocolAbort(String),
    #[error("audit failed: {0}")]
    Audit(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

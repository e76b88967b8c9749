use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular or ill-conditioned (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },
    #[error("tridiagonal recursion breakdown at index {index}")]
    RecursionBreakdown { index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Config { key: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("every trial was an outage for policy {policy} at {snr_db} dB, mu = {mu}")]
    AllOutage { policy: String, snr_db: f64, mu: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

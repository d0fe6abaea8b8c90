use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature would need more nodes than the configured cap.
    #[error("unresolved: {what} needs {needed} nodes (cap {cap})")]
    Unresolved {
        what: String,
        needed: usize,
        cap: usize,
    },

    /// Invalid configuration or input data.
    #[error("config error: {0}")]
    Config(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The time integrator produced a non-finite value.
    #[error("blow-up detected after t = {t_last_valid}")]
    BlowUp { t_last_valid: f64 },

    /// A bilinear triple outside the nonvanishing set.
    #[error("frequency triple ({0}, {1}, {2}) outside the nonvanishing set")]
    OutsideLambda(f64, f64, f64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use thiserror::Error;

/// Errors raised by the geometry, measure and estimator layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("explicit table has no tail rule; cannot evaluate {what} at digit {digit}")]
    UnsupportedTailQuery { what: &'static str, digit: String },

    #[error("the Gauss-map model needs exact digits, got log-only digit with log value {log_value}")]
    ExactDigitRequired { log_value: f64 },

    #[error("invalid digit range: end {end} precedes start {start}")]
    InvalidRange { start: String, end: String },

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("digit 1 has no right neighbor; the neighbor construction skips it")]
    DigitOneSkipped,

    #[error("no k0 in [{k_lo}, {k_hi}] satisfies the bound (worst left-hand side {worst_lhs:.6} at k = {worst_k})")]
    NoK0Found {
        k_lo: u64,
        k_hi: u64,
        worst_k: u64,
        worst_lhs: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported for this measure: {0}")]
    UnsupportedMeasure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

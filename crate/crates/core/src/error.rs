use thiserror::Error;

/// Errors raised by the model, estimators and I/O layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The instance is too small for the quantity to be defined (e.g. α with a single unit).
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// A measured value lies outside the range the model can produce.
    #[error("inconsistent measurement: {0}")]
    InconsistentMeasurement(String),

    #[error("over-subscribed contributions: sequential fractions sum to {total} (must be < 1)")]
    OverSubscribedContributions { total: f64 },

    #[error("invalid clustering: factor {factor} must lie in [1, {units}]")]
    InvalidClustering { factor: f64, units: u64 },

    #[error("out of model range: {0}")]
    OutOfModelRange(String),

    #[error("inverted times: time64 ({time64:e}) is below time16 ({time16:e})")]
    InvertedTimes { time16: f64, time64: f64 },

    #[error(
        "negative housekeeping: time64 ({time64:e}) exceeds {ratio} x time16 ({time16:e}); the model cannot explain the data"
    )]
    NegativeHousekeeping {
        time16: f64,
        time64: f64,
        ratio: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },

    #[error("integrity error in record '{record}' (line {line}): {message}")]
    Integrity {
        record: String,
        line: u64,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

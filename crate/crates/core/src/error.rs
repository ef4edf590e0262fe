use thiserror::Error;

/// Errors raised by the event information test and its companions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time series is empty")]
    EmptySeries,
    #[error("observation dimension must be at least 1")]
    ZeroDimension,
    #[error("observation {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at observation {index}")]
    NonFinite { index: usize },
    #[error("event mark at index {index} is {value}, expected 0 or 1")]
    InvalidMark { index: usize, value: u8 },
    #[error("series has length {series} but event series has length {events}")]
    LengthMismatch { series: usize, events: usize },
    #[error("event series is degenerate (all marks are {mark})")]
    DegenerateEvents { mark: u8 },
    #[error("maximum lag must be at least 1, got {0}")]
    InvalidMaxLag(usize),
    #[error("cannot place {events} events in a series of length {length}")]
    InvalidCount { events: usize, length: usize },

    #[error("two-sample test received an empty sample")]
    EmptySample,
    #[error("test requires univariate data, got dimension {0}")]
    NonUnivariate(usize),
    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("kernel bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("permutation count must be at least 99, got {0}")]
    InvalidPermutationCount(usize),

    #[error("cannot adjust an empty list of p-values")]
    EmptyList,
    #[error("p-value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("minimum sample size must be at least 2, got {0}")]
    InvalidMinSize(usize),
    #[error("no lag pair has two samples of at least {min_size} observations")]
    NoTestablePairs { min_size: usize },

    #[error("degrees of freedom must be at least 3, got {0}")]
    InvalidDof(f64),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("series of length {length} is too short for lag order {lag}")]
    TooShort { length: usize, lag: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside the open interval (0, 1)")]
    RateOutOfRange { name: &'static str, value: f64 },

    #[error("{name} = {value} is invalid: {reason}")]
    BadParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("ensemble size n = {n} is invalid: n must be at least 1")]
    BadSize { n: usize },

    #[error("n = {n} exceeds the limit of {limit} for {what}")]
    SizeGuardExceeded {
        n: usize,
        limit: usize,
        what: &'static str,
    },

    #[error("replication count {reps} is below the minimum of {min}")]
    TooFewReplications { reps: u64, min: u64 },

    #[error("position {position} has zero empirical variance; rate too extreme for the replication count")]
    DegenerateVariance { position: usize },

    #[error("class {class} has no samples in the prediction matrix")]
    SingleClassData { class: u8 },

    #[error("entry at row {row}, column {column} is {value:?}; expected 0 or 1")]
    NonBinaryEntry {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that come from the environment rather than from the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

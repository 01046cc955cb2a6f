use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into two families: refusals ([`Error::is_refusal`]), which
/// mean "cannot do this at desk scale or under these hypotheses", and
/// genuine failures (malformed input, I/O).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} requires {requirement}, got {got}")]
    OutOfRange {
        what: &'static str,
        requirement: String,
        got: String,
    },

    #[error("{what}: estimated cost {estimated} exceeds budget {budget}")]
    Budget {
        what: &'static str,
        estimated: String,
        budget: u64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    /// Structured refusals: budget exhausted or a hypothesis not met.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::OutOfRange { .. }
                | Error::Budget { .. }
                | Error::Precondition(_)
                | Error::InsufficientData(_)
        )
    }

    /// Malformed user input.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Parse(_))
    }

    pub(crate) fn budget(what: &'static str, estimated: impl ToString, budget: u64) -> Self {
        Error::Budget {
            what,
            estimated: estimated.to_string(),
            budget,
        }
    }

    pub(crate) fn out_of_range(what: &'static str, requirement: impl Into<String>, got: impl ToString) -> Self {
        Error::OutOfRange {
            what,
            requirement: requirement.into(),
            got: got.to_string(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

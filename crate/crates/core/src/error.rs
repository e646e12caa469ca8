use thiserror::Error;

/// Errors raised by the analysis and synthesis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("insufficient scales: {available} usable level(s), at least {required} required")]
    InsufficientScales { available: usize, required: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("degenerate leader at level {level}: zero or masked value on the path of x0")]
    DegenerateLeader { level: usize },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("incomplete report: missing {0}")]
    IncompleteReport(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("{stage} stage failed: {source}")]
    Stage { stage: String, source: Box<Error> },
}

/// Coarse classification used by the command-line exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_) | Error::IncompleteReport(_) => ErrorClass::Config,
            Error::InvalidData(_) | Error::Io(_) | Error::InsufficientData(_) => ErrorClass::Data,
            Error::InsufficientScales { .. }
            | Error::Degenerate(_)
            | Error::DegenerateLeader { .. }
            | Error::NoRoot(_)
            | Error::Internal(_) => ErrorClass::Numeric,
            Error::Stage { source, .. } => source.class(),
        }
    }

    /// Tags the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage: stage.to_string(),
                source: Box::new(other),
            },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

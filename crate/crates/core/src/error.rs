use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A parameter fell outside its documented bound; `bound` names it.
    #[error("invalid params: {bound}")]
    InvalidParams { bound: String },

    #[error("planning failed: {reason}")]
    PlanningFailed {
        reason: String,
        /// Rule violations still present when planning gave up.
        residual: Vec<String>,
    },

    #[error("generation failed: {0}")]
    GenerationFailed(String),

    #[error("sampling failed: {0}")]
    SamplingFailed(String),

    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },

    #[error("hash mismatch: {0}")]
    HashMismatch(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("remote backend: {0}")]
    Remote(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn params(bound: impl Into<String>) -> Self {
        Error::InvalidParams { bound: bound.into() }
    }

    pub(crate) fn planning(reason: impl Into<String>) -> Self {
        Error::PlanningFailed {
            reason: reason.into(),
            residual: Vec::new(),
        }
    }
}

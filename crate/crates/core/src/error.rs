use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("constraint violated: {field}: {constraint}")]
    Constraint {
        field: &'static str,
        constraint: &'static str,
    },

    #[error("truncation: {message} (cutoff >= {required_cutoff} needed)")]
    Truncation {
        message: String,
        required_cutoff: usize,
    },

    #[error("frame mismatch: cannot compare a state in the {0} frame with one in the {1} frame")]
    FrameMismatch(&'static str, &'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use thiserror::Error;

/// Errors raised by map construction, parsing and planning entry points.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("height map has no known cells")]
    EmptyMap,

    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("surface normal undefined at ({x}, {y}): {reason}")]
    UndefinedNormal { x: f64, y: f64, reason: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

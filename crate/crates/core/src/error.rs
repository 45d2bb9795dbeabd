use crate::lp::LpError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("objects live in different windows")]
    WindowMismatch,
    #[error("index {0} is outside the window")]
    IndexOutsideWindow(usize),
    #[error("window must contain index {0}")]
    MissingIndex(usize),
    #[error("window must be non-empty")]
    EmptyWindow,
    #[error("operation requires a polyhedral norm or set: {0}")]
    NotPolyhedral(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("linear program is unbounded: {0}")]
    Unbounded(String),
    #[error("sets are not strictly separated (gap {0})")]
    NotSeparated(String),
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("value is not rational: {0}")]
    NonRational(String),
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

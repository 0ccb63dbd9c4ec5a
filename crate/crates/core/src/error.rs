//! Error taxonomy shared by the whole toolkit.
//!
//! Three failure families matter downstream: bad parameters (caller mistakes,
//! mapped to usage exit codes by the CLI), I/O and file-format trouble, and
//! numerical-domain violations (values outside a model's validity box,
//! degenerate statistics, non-convergence).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// A file exists but its contents are not in the expected format.
    #[error("format error: {0}")]
    Format(String),
    /// Inputs left the numerical domain a model is valid on.
    #[error("numerical domain error: {0}")]
    Domain(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error family to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 2,
            Error::Io(_) | Error::Format(_) => 3,
            Error::Domain(_) => 4,
        }
    }

    /// An I/O error annotated with the path it occurred on.
    pub fn io_at(path: &std::path::Path, e: std::io::Error) -> Error {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rank deficient: |R[{index},{index}]| = {value:e} below tolerance")]
    RankDeficient { index: usize, value: f64 },

    #[error("no closed-form conjugate for {0}")]
    NotInTable(String),

    #[error("point outside the subdifferential domain: {0}")]
    OutOfDomain(String),

    #[error("inner s x s matrix is singular: {kept} of {expected} eigenvalues above tolerance")]
    SingularInnerMatrix { kept: usize, expected: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
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

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

use thiserror::Error;

use crate::system::Violation;

/// Errors raised by analysis, construction and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid rational {value:?} in {field}: {reason}")]
    InvalidRational {
        field: String,
        value: String,
        reason: String,
    },

    #[error("system failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("point id {id} out of range (system has {len} points)")]
    PointOutOfRange { id: usize, len: usize },

    #[error("unknown point label {0:?}")]
    UnknownLabel(String),

    #[error("degenerate query: {0}")]
    Degenerate(String),

    #[error("state budget of {limit} exceeded")]
    BudgetExceeded { limit: usize },

    #[error("internal consistency violation: {0}")]
    Internal(String),

    #[error("unknown suite {0:?}")]
    UnknownSuite(String),

    #[error("generator failure: {0}")]
    Generator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::model::Violation;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("threshold margin beta - min(b) = {margin:e} is not positive")]
    InfeasibleMargin { margin: f64 },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("failed to parse instance document: {0}")]
    Parse(String),

    #[error("instance failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

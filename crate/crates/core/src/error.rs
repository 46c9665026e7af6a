use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// `Parameter` covers out-of-range or inconsistent arguments; `Constraint`
/// covers infeasible ladder/experiment configurations. Callers that map
/// errors to process exit codes treat both as usage errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("constraint error: {0}")]
    Constraint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn constraint_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Constraint(msg.into()))
}

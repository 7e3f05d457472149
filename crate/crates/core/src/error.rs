use thiserror::Error;

/// Errors raised by the solver, the group machinery and the experiment harness.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e} at column {column}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    /// The weak-form integrand produced a non-finite value.
    #[error("non-finite residual at t = {t} (u = {u:?})")]
    Evaluation { t: f64, u: Vec<f64> },

    #[error("point outside the admissible domain: {0}")]
    Domain(String),

    /// The transformed time is not a valid reparametrization (dt̂/dt vanished or changed sign).
    #[error("fold at t = {t}: dt^/dt = {rate:e}")]
    Fold { t: f64, rate: f64 },

    #[error(
        "Newton iteration failed after {iterations} iterations: {reason} (residual {residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        reason: String,
    },

    #[error("t = {t} outside [{start}, {end}]")]
    Range { t: f64, start: f64, end: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

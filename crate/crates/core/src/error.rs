use thiserror::Error;

/// Errors raised by the estimators, the reference model and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("derivative of order {order} is not available for the {kernel} kernel")]
    UnsupportedOrder { kernel: &'static str, order: usize },

    #[error("degenerate local design at x = {x}: determinant {det:e} below floor {floor:e}")]
    DegenerateDesign { x: f64, det: f64, floor: f64 },

    #[error("degenerate design while evaluating observation {index}: {source}")]
    DegenerateObservation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("estimated conditional CDF at x = {x} never reaches u = {u} on the inversion grid")]
    NoCrossing { x: f64, u: f64 },

    #[error("correlation triple is not positive definite")]
    NotPositiveDefinite,

    #[error("numerically negative variance {0:e}")]
    NegativeVariance(f64),

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}

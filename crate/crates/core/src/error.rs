//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::solver::{FieldMapTuple, SolveCertificate};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tree length requested for {count} terminals, exact solver is capped at {limit}")]
    TerminalLimitExceeded { count: usize, limit: usize },

    #[error("point {point} is not in X (|X| = {size})")]
    UnknownPoint { point: usize, size: usize },

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric violation: {0}")]
    MetricViolation(String),

    #[error("invalid weight factor {value} in slot {slot}")]
    InvalidWeight { slot: usize, value: f64 },

    #[error("exponent mismatch: {0}")]
    ExponentMismatch(String),

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("kernel has no gamma slots")]
    NoGammaSlots,

    #[error("degree precondition violated: {0}")]
    DegreeMismatch(String),

    #[error("structural invariant violated: {0}")]
    Structure(String),

    #[error("operator {name} is singular")]
    SingularOperator { name: String },

    #[error("oracle input too large: {0}")]
    TooLarge(String),

    #[error("hypotheses not met: {reason}")]
    HypothesesFailed {
        reason: String,
        certificate: Option<Box<SolveCertificate>>,
    },

    #[error("fixed point iteration did not converge within {} iterations", .certificate.iterations)]
    MaxIterExceeded {
        best: Box<FieldMapTuple>,
        certificate: Box<SolveCertificate>,
    },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("unknown command {0}")]
    UnknownCommand(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code used in CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TerminalLimitExceeded { .. } => "TerminalLimitExceeded",
            Error::UnknownPoint { .. } => "UnknownPoint",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::MetricViolation(_) => "MetricViolation",
            Error::InvalidWeight { .. } => "InvalidWeight",
            Error::ExponentMismatch(_) => "ExponentMismatch",
            Error::AxisMismatch(_) => "AxisMismatch",
            Error::NoGammaSlots => "NoGammaSlots",
            Error::DegreeMismatch(_) => "DegreeMismatch",
            Error::Structure(_) => "StructureViolation",
            Error::SingularOperator { .. } => "SingularOperator",
            Error::TooLarge(_) => "TooLarge",
            Error::HypothesesFailed { .. } => "HypothesesFailed",
            Error::MaxIterExceeded { .. } => "MaxIterExceeded",
            Error::Schema { .. } => "SchemaError",
            Error::UnknownCommand(_) => "UnknownCommand",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn arity(expected: usize, found: usize) -> Self {
        Error::ArityMismatch { expected, found }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

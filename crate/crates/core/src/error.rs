use thiserror::Error;

/// Errors produced by the measure, distance, simulation and fitting routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside its domain: {reason}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("exponent alpha = {0} is not supported by the closed form (q_c is singular at alpha = 1)")]
    UnsupportedExponent(f64),

    #[error("Pareto transport breakpoint {0} exceeds 1; the empirical/Pareto closed form needs breakpoint <= 1")]
    InconsistentNormalization(f64),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("unsupported comparison: {0}")]
    UnsupportedComparison(String),

    #[error("tail function is not nonincreasing near u = {0}")]
    NonMonotoneTail(f64),

    #[error("state left the overflow guard at t = {time}: x = {value}")]
    BlowUp { time: f64, value: f64 },

    #[error("coupling incompatible: {0}")]
    CouplingIncompatible(String),

    #[error("incomplete input: missing `{0}`")]
    IncompleteInput(&'static str),

    #[error("division by zero total: {0}")]
    DivisionDomain(String),

    #[error("{path}: {reason}")]
    Data { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numeric,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Divergence(_) | Error::BlowUp { .. } => ErrorKind::Numeric,
            Error::Io(_) => ErrorKind::Io,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::ParameterDomain {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Returns an error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, value, "must be finite and > 0"))
    }
}

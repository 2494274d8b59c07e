use thiserror::Error;

use crate::cf_models::LawKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("transfer function has a pole at omega = {omega} rad/s")]
    PoleAtFrequency { omega: f64 },

    #[error("{law}: no parameter draw reached v_e = {v_e} m/s after {attempts} attempts")]
    RejectionExhausted {
        law: LawKind,
        v_e: f64,
        attempts: usize,
    },

    #[error("first_harmonic needs at least {min} samples per period, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("harmonic balance did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        magnitude: f64,
        phase: f64,
    },

    #[error("collision during simulation at t = {time:.2} s (spacing {spacing:.3} m)")]
    CollisionDuringSim { time: f64, spacing: f64 },

    #[error("response is not periodic: successive-period gains differ by {relative_change:.2e}")]
    NonPeriodicResponse { relative_change: f64 },

    #[error("{law} has no time-domain realization for simulation")]
    UnsupportedLaw { law: LawKind },

    #[error("vehicle {index}: {source}")]
    Vehicle {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("oscillation amplitude {amplitude:.3} m approaches platoon length {length:.3} m")]
    DegenerateSpacing { amplitude: f64, length: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { got: usize, needed: usize },

    #[error("{rejected} of {total} samples rejected; aborting ensemble")]
    TooManyRejected { rejected: usize, total: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn validation(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: msg.into(),
        }
    }

    /// Short machine-friendly tag, used for rejection bookkeeping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::PoleAtFrequency { .. } => "pole_at_frequency",
            Error::RejectionExhausted { .. } => "rejection_exhausted",
            Error::TooFewSamples { .. } => "too_few_samples",
            Error::NoConvergence { .. } => "no_convergence",
            Error::CollisionDuringSim { .. } => "collision",
            Error::NonPeriodicResponse { .. } => "non_periodic",
            Error::UnsupportedLaw { .. } => "unsupported_law",
            Error::Vehicle { source, .. } => source.kind(),
            Error::DegenerateSpacing { .. } => "degenerate_spacing",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::TooManyRejected { .. } => "too_many_rejected",
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::Io(_) => "io",
        }
    }
}

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

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::AmplitudeState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("coupling ratio undefined: g_a = 0")]
    UndefinedRatio,

    #[error("unsupported regime for {operation}: {reason}")]
    UnsupportedRegime {
        operation: &'static str,
        reason: String,
    },

    #[error("no cavity dark state: coupling {coupling} vanishes")]
    NoDarkState { coupling: &'static str },

    #[error("emission probabilities undefined: {0}")]
    UndefinedProbability(&'static str),

    #[error("state is not normalized (squared norm {norm2})")]
    NotNormalized { norm2: f64 },

    #[error("directionality {d} outside the invertible range (0, {d_max}]")]
    OutOfInvertibleRange { d: f64, d_max: f64 },

    #[error("r_a = {r_a} gives no invertible C-D relation (need 0 < r_a < 1)")]
    NonInvertibleConfiguration { r_a: f64 },

    #[error("insufficient emitting runs: {n_emitting} (need at least 2)")]
    InsufficientCounts { n_emitting: u64 },

    #[error("estimated directionality {d_hat} outside the invertible domain (0, {d_max}]")]
    NonInvertibleEstimate { d_hat: f64, d_max: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure {
        t: f64,
        reason: String,
        last_good: Box<AmplitudeState>,
    },

    #[error("concurrence routes disagree: general {general}, closed form {closed}")]
    RouteMismatch { general: f64, closed: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable category, used for exit codes and error reports.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. }
            | Error::UndefinedRatio
            | Error::UnsupportedRegime { .. }
            | Error::NoDarkState { .. }
            | Error::UndefinedProbability(_)
            | Error::NotNormalized { .. } => "domain",
            Error::OutOfInvertibleRange { .. }
            | Error::NonInvertibleConfiguration { .. }
            | Error::InsufficientCounts { .. }
            | Error::NonInvertibleEstimate { .. } => "estimation",
            Error::IntegrationFailure { .. } => "integration",
            Error::RouteMismatch { .. } => "internal",
            Error::InvalidInput(_) | Error::Config { .. } => "config",
            Error::Io { .. } | Error::Json(_) => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

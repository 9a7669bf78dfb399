use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frequency {omega} outside the admissible window {window}")]
    InvalidFrequency { omega: f64, window: &'static str },

    #[error("amplitude {amplitude} cannot be inverted (admissible range {range})")]
    AmplitudeOutOfRange { amplitude: f64, range: &'static str },

    #[error("domain too small: |u| = {boundary_value:e} at the x-boundary (limit {limit:e})")]
    DomainTooSmall { boundary_value: f64, limit: f64 },

    #[error("radial extent {radius} does not cover the grid (Q = {tail:e} at r = {needed})")]
    DomainMismatch { radius: f64, needed: f64, tail: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("non-finite values at step {step}")]
    Diverged { step: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("malformed snapshot at byte offset {offset}: {reason}")]
    Snapshot { offset: u64, reason: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

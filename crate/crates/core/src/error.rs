use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vessel parameters: {0}")]
    InvalidVessel(String),

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error(
        "position is outside tube: nearest-point distance {distance:.3} m exceeds {limit:.3} m"
    )]
    OutsideTube { distance: f64, limit: f64 },

    #[error("path variable {theta:.6} outside path domain [{start}, {end}]")]
    OutOfDomain { theta: f64, start: f64, end: f64 },

    #[error("parametrisation singularity: 1 - kappa*y_bp = {margin:.6} below floor {floor:.6}")]
    Singularity { margin: f64, floor: f64 },

    #[error("guidance infeasible: current exceeds speed (u_td^2 - VN_hat^2 = {slack:.6e})")]
    CurrentExceedsSpeed { slack: f64 },

    #[error("scenario refused by feasibility check: {}", reasons.join("; "))]
    Infeasible { reasons: Vec<String> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

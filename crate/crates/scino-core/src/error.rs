//! Crate-wide error type.
//!
//! Variants map onto the CLI exit codes: config 2, data 3, numeric 4,
//! remote provider 5.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad hyperparameters, incompatible options).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent data (CSV, graph JSON, shape mismatches).
    #[error("data error: {0}")]
    Data(String),

    /// Numerical failure (divergence, singular systems, non-finite values).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Remote prior provider failure.
    #[error("remote provider error: {0}")]
    Remote(String),

    /// Training loss became non-finite; carries the last checkpoint that was
    /// still finite so callers can persist it.
    #[error("training diverged at epoch {epoch}: loss became non-finite")]
    TrainingDiverged {
        epoch: usize,
        last_good: Box<crate::train::TrainedScoreModel>,
    },

    /// `|∂_{x_l} S_l|` fell below the degeneracy guard during a deciduous
    /// update; clamping here is exactly the instability the residue update
    /// is supposed to avoid, so we refuse instead.
    #[error("degenerate denominator: |d S_{node}/d x_{node}| < {threshold:e} at sample {sample}")]
    DegenerateDenominator {
        node: usize,
        sample: usize,
        threshold: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code for the CLI: 2 config, 3 data, 4 numeric, 5 remote.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 3,
            Error::Numeric(_)
            | Error::TrainingDiverged { .. }
            | Error::DegenerateDenominator { .. } => 4,
            Error::Remote(_) => 5,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parse error at row {row}, column `{column}`: cannot read {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("factor `{0}` has a single level")]
    DegenerateFactor(String),
    #[error("design is rank deficient; confounded columns belong to: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("model is saturated (error DF = 0); no F tests are possible")]
    Saturated,
    #[error("PRESS undefined: run {0} has leverage 1")]
    PressUndefined(usize),
    #[error("gain ratio undefined: split has fewer than two non-empty children")]
    UndefinedRatio,
    #[error("R² undefined: observed values have zero variance")]
    UndefinedRSquared,
    #[error("fold {fold}: {reason}")]
    Fold { fold: usize, reason: String },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

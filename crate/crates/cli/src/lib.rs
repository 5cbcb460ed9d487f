//! Command-line pipeline over `weldopt-core`: load a dataset, run the Taguchi
//! analysis, the ANOVA and the tree-ensemble fit, and render a report.

pub mod config;
pub mod pipeline;
pub mod published;
pub mod render;

pub use config::{CvScheme, FeatureSubsample, InputSource, ModelKind, OutputFormat, RunConfig, StageSet};
pub use pipeline::{run_pipeline, ReportDocument};
pub use render::render;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("data: {0}")]
    Data(String),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Data(_) => 1,
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

/// Exit code when every requested stage failed.
pub const EXIT_ALL_STAGES_FAILED: i32 = 1;

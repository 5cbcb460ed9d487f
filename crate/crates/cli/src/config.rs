use std::path::PathBuf;

use serde::Serialize;
use weldopt_core::taguchi::SnCriterion;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "path", rename_all = "snake_case")]
pub enum InputSource {
    Builtin,
    Csv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Rf,
    Gbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "scheme", content = "k", rename_all = "snake_case")]
pub enum CvScheme {
    Loo,
    KFold(usize),
}

impl std::str::FromStr for CvScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "loo" {
            return Ok(Self::Loo);
        }
        match s.strip_prefix("k:").map(str::parse::<usize>) {
            Some(Ok(k)) if k >= 2 => Ok(Self::KFold(k)),
            Some(Ok(k)) => Err(format!("fold count {k} must be at least 2")),
            _ => Err(format!("expected `loo` or `k:<K>`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

/// Which pipeline stages a subcommand runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageSet {
    pub taguchi: bool,
    pub anova: bool,
    pub model: bool,
}

impl StageSet {
    pub const ALL: Self = Self {
        taguchi: true,
        anova: true,
        model: true,
    };
    pub const TAGUCHI: Self = Self {
        taguchi: true,
        anova: false,
        model: false,
    };
    pub const ANOVA: Self = Self {
        taguchi: false,
        anova: true,
        model: false,
    };
    pub const FIT: Self = Self {
        taguchi: false,
        anova: false,
        model: true,
    };
}

/// Feature-subsample setting: an absolute count, or a fraction of the
/// factor count when below 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureSubsample(pub f64);

impl FeatureSubsample {
    pub fn resolve(self, features: usize) -> usize {
        if self.0 < 1.0 {
            ((self.0 * features as f64).ceil() as usize).max(1)
        } else {
            self.0.round() as usize
        }
    }
}

/// Fully explicit configuration of one pipeline run. Every field is
/// recorded in the report so the run can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: InputSource,
    pub response: String,
    pub criterion: SnCriterion,
    pub model: ModelKind,
    pub trees: usize,
    pub rounds: usize,
    /// Tree depth limit; 0 is unlimited.
    pub depth: usize,
    pub nu: f64,
    pub lambda: f64,
    /// Features searched per split; `None` means all.
    pub m: Option<FeatureSubsample>,
    pub cv: CvScheme,
    pub seed: u64,
    pub format: OutputFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub stages: StageSet,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: InputSource::Builtin,
            response: "hardness".into(),
            criterion: SnCriterion::LargerIsBetter,
            model: ModelKind::Rf,
            trees: 200,
            rounds: 100,
            depth: 0,
            nu: 0.1,
            lambda: 0.0,
            m: None,
            cv: CvScheme::Loo,
            seed: 0,
            format: OutputFormat::Text,
            out: None,
            stages: StageSet::ALL,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if self.trees == 0 {
            return usage("--trees must be at least 1".into());
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return usage(format!("--nu {} must be in (0, 1]", self.nu));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return usage(format!("--lambda {} must be >= 0", self.lambda));
        }
        if let Some(FeatureSubsample(m)) = self.m {
            if !(m > 0.0 && m.is_finite()) {
                return usage(format!("--m {m} must be positive"));
            }
        }
        if self.format == OutputFormat::Csv && self.out.is_none() {
            return usage("--format csv writes one file per section and needs --out".into());
        }
        Ok(())
    }
}

//! Main-effects general linear model, ANOVA with adjusted (nested-model) sums
//! of squares, and the model summary including predicted R² from PRESS.
//!
//! Factors are effects coded: a factor with L levels contributes L-1 columns,
//! column k being +1 at level k, -1 at the last level and 0 elsewhere.

use serde::{Serialize, Serializer};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::numfmt::round_sig6;
use crate::special::f_survival;
use crate::taguchi::{factor_levels, FactorLevels};

/// Significance level for the `significant` flag (95 % confidence).
pub const ALPHA: f64 = 0.05;

/// Smallest reported p-value.
pub const MIN_P_VALUE: f64 = 1e-300;

/// Least-squares fit of the main-effects model.
#[derive(Debug, Clone)]
pub struct GlmFit {
    pub factor_names: Vec<String>,
    pub levels: Vec<FactorLevels>,
    /// Owning factor of each design column; `None` for the intercept.
    pub column_owner: Vec<Option<usize>>,
    pub design: Vec<Vec<f64>>,
    pub response: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub hat_diagonal: Vec<f64>,
    pub sse: f64,
    pub sst: f64,
    pub error_df: usize,
}

impl GlmFit {
    pub fn run_count(&self) -> usize {
        self.response.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.column_owner.len()
    }

    pub fn total_df(&self) -> usize {
        self.run_count() - 1
    }

    /// Design columns owned by `factor`.
    pub fn factor_columns(&self, factor: usize) -> Vec<usize> {
        (0..self.column_owner.len())
            .filter(|&c| self.column_owner[c] == Some(factor))
            .collect()
    }

    /// SSE of the model refit without `factor`'s columns.
    pub fn reduced_sse(&self, factor: usize) -> Result<f64> {
        let keep: Vec<usize> = (0..self.column_owner.len())
            .filter(|&c| self.column_owner[c] != Some(factor))
            .collect();
        let x: Vec<Vec<f64>> = self
            .design
            .iter()
            .map(|row| keep.iter().map(|&c| row[c]).collect())
            .collect();
        let ls = linalg::least_squares(&x, &self.response)
            .map_err(|col| self.rank_error(&keep, col))?;
        Ok(ls.sse)
    }

    // Names the factor owning the dependent column plus every earlier factor
    // whose removal restores full rank.
    fn rank_error(&self, columns: &[usize], dependent: usize) -> Error {
        let name = |owner: Option<usize>| match owner {
            Some(f) => self.factor_names[f].clone(),
            None => "intercept".to_string(),
        };
        let prefix = &columns[..=dependent];
        let culprit = self.column_owner[columns[dependent]];
        let mut involved = vec![name(culprit)];
        let mut earlier: Vec<Option<usize>> = prefix.iter().map(|&c| self.column_owner[c]).collect();
        earlier.dedup();
        for owner in earlier {
            if owner == culprit || owner.is_none() {
                continue;
            }
            let without: Vec<Vec<f64>> = self
                .design
                .iter()
                .map(|row| {
                    prefix
                        .iter()
                        .filter(|&&c| self.column_owner[c] != owner)
                        .map(|&c| row[c])
                        .collect()
                })
                .collect();
            if linalg::invert(&linalg::gram(&without)).is_ok() {
                involved.push(name(owner));
            }
        }
        Error::RankDeficient(involved)
    }
}

/// Effects-coded design matrix and column owners for `d`.
pub fn design_matrix(d: &Dataset) -> Result<(Vec<FactorLevels>, Vec<Vec<f64>>, Vec<Option<usize>>)> {
    let levels = factor_levels(d);
    if let Some(fl) = levels.iter().find(|fl| fl.levels.len() < 2) {
        return Err(Error::DegenerateFactor(fl.factor.clone()));
    }
    let mut owner = vec![None];
    for (j, fl) in levels.iter().enumerate() {
        owner.extend(std::iter::repeat(Some(j)).take(fl.levels.len() - 1));
    }
    let design = d
        .runs()
        .iter()
        .map(|run| {
            let mut row = vec![1.0];
            for (j, fl) in levels.iter().enumerate() {
                let k = fl.index_of(run.factors[j]).expect("level present");
                let last = fl.levels.len() - 1;
                row.extend((0..last).map(|c| {
                    if k == last {
                        -1.0
                    } else if k == c {
                        1.0
                    } else {
                        0.0
                    }
                }));
            }
            row
        })
        .collect();
    Ok((levels, design, owner))
}

/// Fits the main-effects model to the dataset's response.
pub fn fit_glm(d: &Dataset) -> Result<GlmFit> {
    let (levels, design, column_owner) = design_matrix(d)?;
    let n = d.len();
    let p = column_owner.len();
    if p > n {
        return Err(Error::InsufficientData(format!(
            "model has {p} parameters but only {n} runs"
        )));
    }
    let response = d.responses();
    let mut fit = GlmFit {
        factor_names: d.factor_names().to_vec(),
        levels,
        column_owner,
        design,
        response,
        coefficients: Vec::new(),
        fitted: Vec::new(),
        residuals: Vec::new(),
        hat_diagonal: Vec::new(),
        sse: 0.0,
        sst: 0.0,
        error_df: n - p,
    };
    let all: Vec<usize> = (0..p).collect();
    let ls = linalg::least_squares(&fit.design, &fit.response).map_err(|col| fit.rank_error(&all, col))?;

    let mean = fit.response.iter().sum::<f64>() / n as f64;
    fit.sst = fit.response.iter().map(|y| (y - mean).powi(2)).sum();
    fit.hat_diagonal = fit
        .design
        .iter()
        .map(|row| linalg::dot(row, &linalg::mat_vec(&ls.gram_inverse, row)))
        .collect();
    fit.coefficients = ls.coefficients;
    fit.fitted = ls.fitted;
    fit.residuals = ls.residuals;
    fit.sse = ls.sse;
    Ok(fit)
}

fn sig6<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig6(*v))
}

fn sig6_opt<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&round_sig6(*x)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaRow {
    pub source: String,
    pub df: usize,
    #[serde(serialize_with = "sig6")]
    pub adj_ss: f64,
    #[serde(serialize_with = "sig6")]
    pub adj_ms: f64,
    #[serde(serialize_with = "sig6")]
    pub f_value: f64,
    #[serde(serialize_with = "sig6")]
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub df: usize,
    #[serde(serialize_with = "sig6")]
    pub ss: f64,
    #[serde(serialize_with = "sig6")]
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalRow {
    pub df: usize,
    #[serde(serialize_with = "sig6")]
    pub ss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub sources: Vec<AnovaRow>,
    pub error: ErrorRow,
    pub total: TotalRow,
}

impl AnovaTable {
    /// Builds the MS, F and p columns from per-source (name, DF, SS) triples
    /// and the error and total aggregates.
    pub fn from_sums(
        sources: &[(&str, usize, f64)],
        error: (usize, f64),
        total: (usize, f64),
    ) -> Result<Self> {
        let (error_df, error_ss) = error;
        if error_df == 0 {
            return Err(Error::Saturated);
        }
        let error_ms = error_ss / error_df as f64;
        let sources = sources
            .iter()
            .map(|&(name, df, ss)| {
                if df == 0 {
                    return Err(Error::Argument(format!("source `{name}` has zero DF")));
                }
                let ms = ss / df as f64;
                let f_value = if error_ms > 0.0 {
                    ms / error_ms
                } else if ms > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                let p_value = f_survival(f_value, df as f64, error_df as f64)?.max(MIN_P_VALUE);
                Ok(AnovaRow {
                    source: name.to_string(),
                    df,
                    adj_ss: ss,
                    adj_ms: ms,
                    f_value,
                    p_value,
                    significant: p_value < ALPHA,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sources,
            error: ErrorRow {
                df: error_df,
                ss: error_ss,
                ms: error_ms,
            },
            total: TotalRow {
                df: total.0,
                ss: total.1,
            },
        })
    }
}

/// ANOVA of a fitted model. The adjusted SS of a factor is the increase in
/// SSE when its columns are dropped and the reduced model is refit.
pub fn anova_table(fit: &GlmFit) -> Result<AnovaTable> {
    if fit.error_df == 0 {
        return Err(Error::Saturated);
    }
    let mut rows = Vec::with_capacity(fit.factor_names.len());
    for (j, name) in fit.factor_names.iter().enumerate() {
        let adj = (fit.reduced_sse(j)? - fit.sse).max(0.0);
        rows.push((name.as_str(), fit.factor_columns(j).len(), adj));
    }
    AnovaTable::from_sums(&rows, (fit.error_df, fit.sse), (fit.total_df(), fit.sst))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    /// Root mean squared error, sqrt(SSE / error DF).
    #[serde(serialize_with = "sig6")]
    pub s: f64,
    #[serde(serialize_with = "sig6")]
    pub r_squared: f64,
    #[serde(serialize_with = "sig6")]
    pub adj_r_squared: f64,
    /// 1 - PRESS/SST; absent when only aggregates are known.
    #[serde(serialize_with = "sig6_opt")]
    pub predicted_r_squared: Option<f64>,
}

impl ModelSummary {
    /// Summary from SSE/SST aggregates and, optionally, PRESS.
    pub fn from_aggregates(sse: f64, error_df: usize, sst: f64, total_df: usize, press: Option<f64>) -> Result<Self> {
        if error_df == 0 {
            return Err(Error::Saturated);
        }
        if !(sst > 0.0) || total_df == 0 {
            return Err(Error::UndefinedRSquared);
        }
        let mse = sse / error_df as f64;
        Ok(Self {
            s: mse.sqrt(),
            r_squared: 1.0 - sse / sst,
            adj_r_squared: 1.0 - mse / (sst / total_df as f64),
            predicted_r_squared: press.map(|p| 1.0 - p / sst),
        })
    }
}

/// Leave-one-out prediction error sum of squares, Σ (eᵢ / (1 - hᵢᵢ))².
pub fn press(fit: &GlmFit) -> Result<f64> {
    fit.residuals
        .iter()
        .zip(&fit.hat_diagonal)
        .enumerate()
        .map(|(i, (e, h))| {
            if 1.0 - h <= 1e-10 {
                Err(Error::PressUndefined(i + 1))
            } else {
                Ok((e / (1.0 - h)).powi(2))
            }
        })
        .sum()
}

pub fn model_summary(fit: &GlmFit) -> Result<ModelSummary> {
    if fit.error_df == 0 {
        return Err(Error::Saturated);
    }
    let press = press(fit)?;
    ModelSummary::from_aggregates(fit.sse, fit.error_df, fit.sst, fit.total_df(), Some(press))
}

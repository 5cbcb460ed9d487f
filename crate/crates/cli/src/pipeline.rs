//! Dataset → Taguchi → ANOVA → model fitting and cross-validation, collected
//! into one [`ReportDocument`]. A failing stage is recorded in its section
//! and does not stop the others.

use serde::Serialize;
use weldopt_core::anova::{anova_table, fit_glm, model_summary, AnovaTable, ModelSummary};
use weldopt_core::cart::{export_tree, fit_regression_tree, ExportFormat, TreeConfig};
use weldopt_core::dataset::{
    builtin_aa6262, kfold_plan, leave_one_out_plan, summarize, Dataset, SummaryStats, DEFAULT_RESPONSE,
};
use weldopt_core::ensemble::{
    cross_validate, feature_importance, regression_metrics, BoostParams, CvResult, FeatureImportance, ForestParams,
    ModelSpec, RegressionMetrics,
};
use weldopt_core::taguchi::{
    check_design, optimal_combination, response_table, Basis, DesignDiagnostics, OptimalCombination, ResponseTable,
};
use weldopt_core::Error as CoreError;

use crate::config::{CvScheme, InputSource, ModelKind, RunConfig};
use crate::published;
use crate::CliError;

/// Outcome of one stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Section<T> {
    Ok(T),
    Failed { message: String },
}

impl<T> Section<T> {
    fn from_result(r: Result<T, CoreError>) -> Self {
        match r {
            Ok(v) => Self::Ok(v),
            Err(e) => Self::Failed { message: e.to_string() },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Self::Ok(v) => Some(v),
            Self::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSection {
    pub runs: usize,
    pub factor_names: Vec<String>,
    pub response: String,
    pub summary: SummaryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSection {
    pub diagnostics: DesignDiagnostics,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaguchiSection {
    pub response_table: ResponseTable,
    pub optimal_raw: OptimalCombination,
    pub optimal_sn: OptimalCombination,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaSection {
    pub table: AnovaTable,
    pub summary: Section<ModelSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvSection {
    pub scheme: CvScheme,
    pub plan_seed: u64,
    pub result: CvResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeExport {
    pub text: String,
    pub graph: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSection {
    pub spec: ModelSpec,
    pub training: RegressionMetrics,
    pub feature_importance: FeatureImportance,
    pub cv: Section<CvSection>,
    /// Single CART tree on all runs with the same depth limit.
    pub tree: Section<TreeExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub topic: String,
    pub published: String,
    pub computed: String,
    pub note: String,
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub dataset: DatasetSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taguchi: Option<Section<TaguchiSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anova: Option<Section<AnovaSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Section<ModelSection>>,
    pub discrepancies: Vec<Discrepancy>,
}

impl ReportDocument {
    /// True when at least one requested analysis stage completed.
    pub fn any_stage_succeeded(&self) -> bool {
        self.design.is_some()
            || self.taguchi.as_ref().is_some_and(|s| s.ok().is_some())
            || self.anova.as_ref().is_some_and(|s| s.ok().is_some())
            || self.model.as_ref().is_some_and(|s| s.ok().is_some())
    }
}

pub fn load_input(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let d = match &cfg.input {
        InputSource::Builtin => builtin_aa6262().with_response(&cfg.response),
        InputSource::Csv(path) => {
            if !path.is_file() {
                return Err(CliError::Io(format!("cannot read input {}", path.display())));
            }
            weldopt_core::dataset::load_csv_with_response(path, &cfg.response)
        }
    };
    d.map_err(|e| match e {
        CoreError::Io { .. } => CliError::Io(e.to_string()),
        other => CliError::Data(other.to_string()),
    })
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<ReportDocument, CliError> {
    cfg.validate()?;
    let d = load_input(cfg)?;

    let dataset = DatasetSection {
        runs: d.len(),
        factor_names: d.factor_names().to_vec(),
        response: d.response_name().to_string(),
        summary: summarize(&d),
    };

    let design = cfg.stages.taguchi.then(|| {
        let diagnostics = check_design(&d);
        DesignSection {
            warnings: diagnostics.warnings(),
            diagnostics,
        }
    });
    let taguchi = cfg.stages.taguchi.then(|| Section::from_result(taguchi_stage(&d, cfg)));
    let anova = cfg.stages.anova.then(|| Section::from_result(anova_stage(&d)));
    let model = cfg.stages.model.then(|| Section::from_result(model_stage(&d, cfg)));

    let mut doc = ReportDocument {
        tool: ToolInfo {
            name: "weldopt",
            version: env!("CARGO_PKG_VERSION"),
        },
        config: cfg.clone(),
        dataset,
        design,
        taguchi,
        anova,
        model,
        discrepancies: Vec::new(),
    };
    if is_reference_dataset(&d) {
        doc.discrepancies = discrepancies(&doc);
    }
    Ok(doc)
}

fn taguchi_stage(d: &Dataset, cfg: &RunConfig) -> Result<TaguchiSection, CoreError> {
    let table = response_table(d, cfg.criterion)?;
    Ok(TaguchiSection {
        optimal_raw: optimal_combination(&table, Basis::Raw)?,
        optimal_sn: optimal_combination(&table, Basis::SN)?,
        response_table: table,
    })
}

fn anova_stage(d: &Dataset) -> Result<AnovaSection, CoreError> {
    let fit = fit_glm(d)?;
    Ok(AnovaSection {
        table: anova_table(&fit)?,
        summary: Section::from_result(model_summary(&fit)),
    })
}

pub fn model_spec(cfg: &RunConfig, features: usize) -> ModelSpec {
    match cfg.model {
        ModelKind::Rf => {
            let m = cfg.m.map_or(features, |m| m.resolve(features));
            ModelSpec::Forest(ForestParams::new(cfg.trees, TreeConfig::with_max_depth(cfg.depth), m, cfg.seed))
        }
        ModelKind::Gbm => ModelSpec::Boost(BoostParams {
            rounds: cfg.rounds,
            cfg: TreeConfig::with_max_depth(cfg.depth),
            learning_rate: cfg.nu,
            l2_penalty: cfg.lambda,
            seed: cfg.seed,
        }),
    }
}

fn model_stage(d: &Dataset, cfg: &RunConfig) -> Result<ModelSection, CoreError> {
    let spec = model_spec(cfg, d.factor_count());
    let model = spec.fit(d)?;
    let training = regression_metrics(&d.responses(), &model.predict_dataset(d)?)?;

    let cv = Section::from_result((|| {
        let plan = match cfg.cv {
            CvScheme::Loo => leave_one_out_plan(d.len())?,
            CvScheme::KFold(k) => kfold_plan(d.len(), k, cfg.seed)?,
        };
        let result = cross_validate(d, &spec, &plan)?;
        Ok(CvSection {
            scheme: cfg.cv,
            plan_seed: cfg.seed,
            result,
        })
    })());

    let tree = Section::from_result(fit_regression_tree(d, &TreeConfig::with_max_depth(cfg.depth)).map(|t| {
        TreeExport {
            text: export_tree(&t, ExportFormat::Text),
            graph: export_tree(&t, ExportFormat::Graph),
        }
    }));

    Ok(ModelSection {
        feature_importance: feature_importance(&model),
        spec,
        training,
        cv,
        tree,
    })
}

/// The dataset is the embedded AA 6262 table (possibly loaded from a CSV
/// transcription of it) with hardness as the response.
fn is_reference_dataset(d: &Dataset) -> bool {
    d.response_name() == DEFAULT_RESPONSE && *d == builtin_aa6262()
}

fn fmt_levels(levels: &[usize]) -> String {
    let letters = ['A', 'B', 'C', 'D', 'E', 'F'];
    levels
        .iter()
        .enumerate()
        .map(|(j, l)| format!("{}{l}", letters.get(j).copied().unwrap_or('X')))
        .collect()
}

fn discrepancies(doc: &ReportDocument) -> Vec<Discrepancy> {
    let mut out = Vec::new();

    if let Some(Section::Ok(t)) = &doc.taguchi {
        if t.optimal_raw.levels != published::OPTIMUM_LEVELS {
            out.push(Discrepancy {
                topic: "optimal level combination".into(),
                published: format!(
                    "{} ({:?})",
                    fmt_levels(&published::OPTIMUM_LEVELS),
                    published::OPTIMUM_SETTINGS
                ),
                computed: format!(
                    "raw-mean basis {} ({:?}); S/N basis {} ({:?})",
                    fmt_levels(&t.optimal_raw.levels),
                    t.optimal_raw.settings,
                    fmt_levels(&t.optimal_sn.levels),
                    t.optimal_sn.settings
                ),
                note: "the level means of the tabulated runs do not peak at the published combination; \
                       the highest single hardness (74.2) is at 1000 rpm, 60 mm/min, 0.1 mm"
                    .into(),
            });
        }
    }

    if let Some(Section::Ok(a)) = &doc.anova {
        let (_, total_ss) = published::ANOVA_TOTAL;
        out.push(Discrepancy {
            topic: "ANOVA total sum of squares".into(),
            published: format!("{total_ss}"),
            computed: format!("{:.3}", a.table.total.ss),
            note: "the published total is not the sum of squared deviations of the nine tabulated hardness \
                   values; the published ANOVA appears to use data that were not tabulated"
                .into(),
        });
        let published_rows: Vec<String> = published::ANOVA_ROWS
            .iter()
            .map(|(s, _, ss, _, f, p)| format!("{s}: SS {ss}, F {f}, p {p}"))
            .collect();
        let computed_rows: Vec<String> = a
            .table
            .sources
            .iter()
            .map(|r| {
                format!(
                    "{}: SS {:.3}, F {:.2}, p {:.3}",
                    r.source, r.adj_ss, r.f_value, r.p_value
                )
            })
            .collect();
        out.push(Discrepancy {
            topic: "ANOVA factor rows".into(),
            published: published_rows.join("; "),
            computed: computed_rows.join("; "),
            note: "published rows are internally consistent (MS = SS/DF, F = MS/MSE) but not reproducible \
                   from the tabulated runs"
                .into(),
        });
        if let Section::Ok(s) = &a.summary {
            let (ps, pr2, padj, ppred) = published::MODEL_SUMMARY;
            out.push(Discrepancy {
                topic: "model summary".into(),
                published: format!("S {ps}, R² {pr2}%, R²(adj) {padj}%, R²(pred) {ppred}%"),
                computed: format!(
                    "S {:.5}, R² {:.2}%, R²(adj) {:.2}%, R²(pred) {}",
                    s.s,
                    100.0 * s.r_squared,
                    100.0 * s.adj_r_squared,
                    s.predicted_r_squared
                        .map_or("n/a".to_string(), |p| format!("{:.2}%", 100.0 * p))
                ),
                note: "computed from the tabulated runs".into(),
            });
        }
    }

    if let Some(Section::Ok(m)) = &doc.model {
        let (label, (mse, mae, r2)) = match m.spec {
            ModelSpec::Boost(_) => ("boosted trees", published::BOOST_METRICS),
            _ => ("random forest", published::RF_METRICS),
        };
        let computed = match &m.cv {
            Section::Ok(cv) => format!(
                "{:?} CV: MSE {:.3}, MAE {:.3}, R² {}",
                cv.scheme,
                cv.result.pooled.mse,
                cv.result.pooled.mae,
                cv.result.pooled
                    .r_squared
                    .map_or("undefined".to_string(), |r| format!("{r:.3}"))
            ),
            Section::Failed { message } => format!("cross-validation failed: {message}"),
        };
        out.push(Discrepancy {
            topic: format!("{label} error metrics"),
            published: format!("MSE {mse}, MAE {mae}, R² {r2}"),
            computed,
            note: "the published split, seed and hyperparameters are unknown, so those figures cannot be \
                   reproduced; cross-validated metrics are reported instead"
                .into(),
        });
    }
    out
}

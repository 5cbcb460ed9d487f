//! Process-parameter analysis for small designed experiments: Taguchi
//! signal-to-noise ratios and main effects, main-effects ANOVA with adjusted
//! sums of squares, CART regression trees, random forests, gradient-boosted
//! trees, feature importance and cross-validated error metrics.
//!
//! The friction-stir-welding hardness data for AA 6262 ships with the crate
//! as [`dataset::builtin_aa6262`].

pub mod anova;
pub mod cart;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod numfmt;
pub mod rng;
pub mod special;
pub mod taguchi;

pub use anova::{anova_table, fit_glm, model_summary, AnovaTable, GlmFit, ModelSummary};
pub use cart::{fit_regression_tree, RegressionTree, TreeConfig, TreeNode};
pub use dataset::{builtin_aa6262, load_csv, Dataset, FoldPlan, Run, SummaryStats};
pub use ensemble::{
    cross_validate, feature_importance, fit_gbm, fit_random_forest, regression_metrics, BoostModel,
    ForestModel, Model, ModelSpec, RegressionMetrics,
};
pub use error::{Error, Result};
pub use special::f_survival;
pub use taguchi::{check_design, optimal_combination, response_table, Basis, SnCriterion};

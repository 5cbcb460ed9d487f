//! Bagged random forests, squared-error gradient boosting, feature
//! importance, regression metrics and cross-validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cart::{check_arity, feature_rows, fit_regression_tree, FeatureSampling, Grower, RegressionTree, TreeConfig, TreeNode};
use crate::dataset::{bootstrap_indices, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::rng;

/// Random forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub cfg: TreeConfig,
    /// Features searched at each split.
    pub m: usize,
    pub seed: u64,
    /// Train each tree on a bootstrap sample (otherwise on all runs).
    pub bootstrap: bool,
    /// Train trees on the rayon pool. Results do not depend on this flag.
    #[serde(skip)]
    pub parallel: bool,
}

impl ForestParams {
    pub fn new(trees: usize, cfg: TreeConfig, m: usize, seed: u64) -> Self {
        Self {
            trees,
            cfg,
            m,
            seed,
            bootstrap: true,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub feature_names: Vec<String>,
    pub params: ForestParams,
    /// Seed of tree t, derived from (master seed, t).
    pub tree_seeds: Vec<u64>,
    pub trees: Vec<TreeNode>,
}

impl ForestModel {
    /// Mean of the tree predictions, summed in tree-index order.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_arity(x, self.feature_names.len())?;
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }
}

pub fn fit_random_forest(d: &Dataset, trees: usize, cfg: &TreeConfig, m: usize, seed: u64) -> Result<ForestModel> {
    fit_random_forest_with(d, &ForestParams::new(trees, *cfg, m, seed))
}

pub fn fit_random_forest_with(d: &Dataset, params: &ForestParams) -> Result<ForestModel> {
    params.cfg.validate()?;
    let p = d.factor_count();
    if params.trees == 0 {
        return Err(Error::Argument("forest needs at least one tree".into()));
    }
    if params.m == 0 || params.m > p {
        return Err(Error::Argument(format!(
            "feature subsample count {} must be in 1..={p}",
            params.m
        )));
    }
    let rows = feature_rows(d);
    let targets = d.responses();
    let n = d.len();
    let tree_seeds: Vec<u64> = (0..params.trees as u64).map(|t| rng::derive_seed(params.seed, t)).collect();

    let grow = |&seed_t: &u64| -> Result<TreeNode> {
        let indices = if params.bootstrap {
            bootstrap_indices(n, seed_t)?
        } else {
            (0..n).collect()
        };
        let mut feature_rng = rng::seeded(rng::derive_seed(seed_t, 0));
        let sampling = if params.m == p {
            FeatureSampling::All
        } else {
            FeatureSampling::Subset {
                rng: &mut feature_rng,
                m: params.m,
            }
        };
        let mut grower = Grower {
            rows: &rows,
            targets: &targets,
            cfg: params.cfg,
            leaf_penalty: 0.0,
            sampling,
        };
        Ok(grower.grow(&indices))
    };

    let trees = if params.parallel {
        tree_seeds.par_iter().map(grow).collect::<Result<Vec<_>>>()?
    } else {
        tree_seeds.iter().map(grow).collect::<Result<Vec<_>>>()?
    };
    Ok(ForestModel {
        feature_names: d.factor_names().to_vec(),
        params: *params,
        tree_seeds,
        trees,
    })
}

/// Gradient boosting hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub rounds: usize,
    pub cfg: TreeConfig,
    /// Shrinkage ν in (0, 1].
    pub learning_rate: f64,
    /// L2 leaf penalty λ ≥ 0; leaf value = Σ residuals / (n + λ).
    pub l2_penalty: f64,
    /// Recorded for replay; squared-error boosting without row subsampling
    /// draws no random numbers.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub feature_names: Vec<String>,
    pub params: BoostParams,
    /// F₀, the mean training response.
    pub initial: f64,
    pub stages: Vec<TreeNode>,
    /// Training MSE of F₀, F₁, …, F_M.
    pub train_mse: Vec<f64>,
}

impl BoostModel {
    /// F₀ + ν Σ h_m(x).
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_arity(x, self.feature_names.len())?;
        let boost: f64 = self.stages.iter().map(|h| h.predict(x)).sum();
        Ok(self.initial + self.params.learning_rate * boost)
    }
}

pub fn fit_gbm(d: &Dataset, rounds: usize, cfg: &TreeConfig, nu: f64, lambda: f64, seed: u64) -> Result<BoostModel> {
    fit_gbm_with(
        d,
        &BoostParams {
            rounds,
            cfg: *cfg,
            learning_rate: nu,
            l2_penalty: lambda,
            seed,
        },
    )
}

pub fn fit_gbm_with(d: &Dataset, params: &BoostParams) -> Result<BoostModel> {
    params.cfg.validate()?;
    let nu = params.learning_rate;
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Argument(format!("learning rate {nu} must be in (0, 1]")));
    }
    if !(params.l2_penalty >= 0.0) || !params.l2_penalty.is_finite() {
        return Err(Error::Argument(format!("L2 penalty {} must be >= 0", params.l2_penalty)));
    }
    let rows = feature_rows(d);
    let y = d.responses();
    let n = y.len();
    let indices: Vec<usize> = (0..n).collect();

    let initial = y.iter().sum::<f64>() / n as f64;
    let mut current = vec![initial; n];
    let mse = |pred: &[f64]| y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64;
    let mut train_mse = vec![mse(&current)];
    let mut stages = Vec::with_capacity(params.rounds);

    for _ in 0..params.rounds {
        let residuals: Vec<f64> = y.iter().zip(&current).map(|(a, b)| a - b).collect();
        let mut grower = Grower {
            rows: &rows,
            targets: &residuals,
            cfg: params.cfg,
            leaf_penalty: params.l2_penalty,
            sampling: FeatureSampling::All,
        };
        let stage = grower.grow(&indices);
        for (f, row) in current.iter_mut().zip(&rows) {
            *f += nu * stage.predict(row);
        }
        train_mse.push(mse(&current));
        stages.push(stage);
    }

    Ok(BoostModel {
        feature_names: d.factor_names().to_vec(),
        params: *params,
        initial,
        stages,
        train_mse,
    })
}

/// Any fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Tree(RegressionTree),
    Forest(ForestModel),
    Boost(BoostModel),
}

impl Model {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Self::Tree(t) => t.predict(x),
            Self::Forest(f) => f.predict(x),
            Self::Boost(b) => b.predict(x),
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            Self::Tree(t) => &t.feature_names,
            Self::Forest(f) => &f.feature_names,
            Self::Boost(b) => &b.feature_names,
        }
    }

    /// Predictions for every run of `d`, in run order.
    pub fn predict_dataset(&self, d: &Dataset) -> Result<Vec<f64>> {
        d.runs().iter().map(|r| self.predict(&r.factors)).collect()
    }

    /// The constituent trees (one for a single tree, the stages for a boost).
    pub fn trees(&self) -> Vec<&TreeNode> {
        match self {
            Self::Tree(t) => vec![&t.root],
            Self::Forest(f) => f.trees.iter().collect(),
            Self::Boost(b) => b.stages.iter().collect(),
        }
    }
}

pub fn predict_ensemble(model: &Model, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

pub const MODEL_FORMAT: &str = "weldopt-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    model: Model,
}

impl Model {
    /// Versioned JSON document.
    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        Ok(doc.model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature_names: Vec<String>,
    pub scores: Vec<f64>,
}

impl FeatureImportance {
    /// Index of the largest score (lowest index on ties); `None` when all zero.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > 0.0 && best.map_or(true, |b| s > self.scores[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Impurity-based importance: each split adds (node sample fraction) ×
/// (impurity decrease) to its feature; ensembles average over their trees;
/// the result is normalized to sum 1 unless no split exists.
pub fn feature_importance(model: &Model) -> FeatureImportance {
    let p = model.feature_names().len();
    let trees = model.trees();
    let mut scores = vec![0.0; p];
    for tree in &trees {
        let mut raw = vec![0.0; p];
        tree.accumulate_importance(&mut raw);
        let n = tree.n_samples() as f64;
        for (s, r) in scores.iter_mut().zip(raw) {
            *s += r / n;
        }
    }
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        scores.iter_mut().for_each(|s| *s /= total);
    }
    FeatureImportance {
        feature_names: model.feature_names().to_vec(),
        scores,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub n: usize,
    pub mse: f64,
    pub mae: f64,
    /// `None` when the observed values have zero variance.
    pub r_squared: Option<f64>,
}

impl RegressionMetrics {
    pub fn r_squared(&self) -> Result<f64> {
        self.r_squared.ok_or(Error::UndefinedRSquared)
    }
}

/// MSE, MAE and R² = 1 - Σ(y-ŷ)²/Σ(y-ȳ)² with ȳ the mean of `y`.
pub fn regression_metrics(y: &[f64], yhat: &[f64]) -> Result<RegressionMetrics> {
    if y.len() != yhat.len() {
        return Err(Error::Argument(format!(
            "{} observations but {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::Argument("metrics need at least 2 observations".into()));
    }
    let n = y.len() as f64;
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    let sae: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum();
    let mean = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    Ok(RegressionMetrics {
        n: y.len(),
        mse: sse / n,
        mae: sae / n,
        r_squared: (sst > 0.0).then(|| 1.0 - sse / sst),
    })
}

/// What to fit inside each cross-validation fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Tree { cfg: TreeConfig },
    Forest(ForestParams),
    Boost(BoostParams),
}

impl ModelSpec {
    pub fn fit(&self, d: &Dataset) -> Result<Model> {
        Ok(match self {
            Self::Tree { cfg } => Model::Tree(fit_regression_tree(d, cfg)?),
            Self::Forest(p) => Model::Forest(fit_random_forest_with(d, p)?),
            Self::Boost(p) => Model::Boost(fit_gbm_with(d, p)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub predictions: Vec<f64>,
    /// Absent for folds with fewer than 2 runs or constant held-out response.
    pub metrics: Option<RegressionMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    /// Held-out prediction of every run, in run order.
    pub predictions: Vec<f64>,
    pub pooled: RegressionMetrics,
}

/// Trains on each fold's complement and predicts the fold.
pub fn cross_validate(d: &Dataset, spec: &ModelSpec, plan: &FoldPlan) -> Result<CvResult> {
    if plan.run_count() != d.len() {
        return Err(Error::Argument(format!(
            "fold plan covers {} runs, dataset has {}",
            plan.run_count(),
            d.len()
        )));
    }
    let y = d.responses();
    let mut predictions = vec![f64::NAN; d.len()];
    let mut folds = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let train = plan.train_indices(fold);
        let test = plan.test_indices(fold);
        if train.len() < 2 {
            return Err(Error::Fold {
                fold,
                reason: format!("training complement has {} run(s), need at least 2", train.len()),
            });
        }
        let model = spec.fit(&d.subset_of(&train)?)?;
        let preds = test
            .iter()
            .map(|&i| model.predict(&d.runs()[i].factors))
            .collect::<Result<Vec<_>>>()?;
        for (&i, &p) in test.iter().zip(&preds) {
            predictions[i] = p;
        }
        let observed: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        let metrics = if test.len() >= 2 {
            regression_metrics(&observed, &preds).ok()
        } else {
            None
        };
        folds.push(FoldResult {
            fold,
            test_indices: test,
            predictions: preds,
            metrics,
        });
    }
    let pooled = regression_metrics(&y, &predictions)?;
    Ok(CvResult {
        folds,
        predictions,
        pooled,
    })
}

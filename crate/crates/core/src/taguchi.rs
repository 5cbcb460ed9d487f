//! Taguchi signal-to-noise ratios, main-effects response tables and design
//! diagnostics.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// The standard L9(3^4) orthogonal array, levels numbered 1..=3.
pub const L9_ARRAY: [[usize; 4]; 9] = [
    [1, 1, 1, 1],
    [1, 2, 2, 2],
    [1, 3, 3, 3],
    [2, 1, 2, 3],
    [2, 2, 3, 1],
    [2, 3, 1, 2],
    [3, 1, 3, 2],
    [3, 2, 1, 3],
    [3, 3, 2, 1],
];

/// Quality criterion used to turn replicates into a signal-to-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnCriterion {
    /// S/N = -10 log10(mean(1/y^2))
    #[default]
    LargerIsBetter,
    /// S/N = -10 log10(mean(y^2))
    SmallerIsBetter,
    /// S/N = 10 log10(mean^2 / s^2), s^2 the sample variance
    NominalIsBest,
}

/// Larger-is-better S/N in decibels. A single replicate reduces to 20 log10(y).
pub fn sn_larger_is_better(y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::Argument("no replicates".into()));
    }
    if let Some(v) = y.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Domain(format!(
            "larger-is-better S/N requires positive responses, got {v}"
        )));
    }
    let msd = y.iter().map(|v| 1.0 / (v * v)).sum::<f64>() / y.len() as f64;
    Ok(-10.0 * msd.log10())
}

pub fn sn_smaller_is_better(y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::Argument("no replicates".into()));
    }
    let msd = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
    if msd == 0.0 {
        return Err(Error::Domain("smaller-is-better S/N undefined for all-zero responses".into()));
    }
    Ok(-10.0 * msd.log10())
}

pub fn sn_nominal_is_best(y: &[f64]) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::Domain(
            "nominal-is-best S/N needs at least 2 replicates to estimate variance".into(),
        ));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 || mean == 0.0 {
        return Err(Error::Domain("nominal-is-best S/N undefined for zero mean or zero variance".into()));
    }
    Ok(10.0 * (mean * mean / var).log10())
}

impl SnCriterion {
    pub fn sn_ratio(self, y: &[f64]) -> Result<f64> {
        match self {
            Self::LargerIsBetter => sn_larger_is_better(y),
            Self::SmallerIsBetter => sn_smaller_is_better(y),
            Self::NominalIsBest => sn_nominal_is_best(y),
        }
    }
}

/// Distinct settings of one factor, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorLevels {
    pub factor: String,
    pub levels: Vec<f64>,
}

impl FactorLevels {
    /// 0-based level index of `value`.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.levels.iter().position(|&l| l == value)
    }
}

/// Distinct levels of every factor in `d`, in factor order.
pub fn factor_levels(d: &Dataset) -> Vec<FactorLevels> {
    d.factor_names()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut levels = d.factor_column(j);
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            FactorLevels {
                factor: name.clone(),
                levels,
            }
        })
        .collect()
}

/// Main effects of one factor on both bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorEffects {
    pub factor: String,
    pub levels: Vec<f64>,
    pub counts: Vec<usize>,
    pub raw_means: Vec<f64>,
    pub sn_means: Vec<f64>,
    pub raw_delta: f64,
    pub sn_delta: f64,
    pub raw_rank: usize,
    pub sn_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTable {
    pub criterion: SnCriterion,
    pub grand_mean: f64,
    pub factors: Vec<FactorEffects>,
}

/// Which level means drive [`optimal_combination`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Raw,
    SN,
}

/// Per-level means of the raw response and of the per-run S/N ratio.
pub fn response_table(d: &Dataset, criterion: SnCriterion) -> Result<ResponseTable> {
    let sn: Vec<f64> = d
        .runs()
        .iter()
        .map(|r| criterion.sn_ratio(&[r.response]))
        .collect::<Result<_>>()?;
    let y = d.responses();
    let levels = factor_levels(d);

    let mut factors = Vec::with_capacity(levels.len());
    for (j, fl) in levels.into_iter().enumerate() {
        if fl.levels.len() < 2 {
            return Err(Error::DegenerateFactor(fl.factor));
        }
        let l = fl.levels.len();
        let mut counts = vec![0usize; l];
        let mut raw = vec![0.0; l];
        let mut snm = vec![0.0; l];
        for (i, run) in d.runs().iter().enumerate() {
            let k = fl.index_of(run.factors[j]).expect("level present");
            counts[k] += 1;
            raw[k] += y[i];
            snm[k] += sn[i];
        }
        for k in 0..l {
            raw[k] /= counts[k] as f64;
            snm[k] /= counts[k] as f64;
        }
        factors.push(FactorEffects {
            factor: fl.factor,
            raw_delta: spread(&raw),
            sn_delta: spread(&snm),
            levels: fl.levels,
            counts,
            raw_means: raw,
            sn_means: snm,
            raw_rank: 0,
            sn_rank: 0,
        });
    }

    let raw_ranks = ranks(&factors.iter().map(|f| f.raw_delta).collect::<Vec<_>>());
    let sn_ranks = ranks(&factors.iter().map(|f| f.sn_delta).collect::<Vec<_>>());
    for (f, (r, s)) in factors.iter_mut().zip(raw_ranks.into_iter().zip(sn_ranks)) {
        f.raw_rank = r;
        f.sn_rank = s;
    }

    Ok(ResponseTable {
        criterion,
        grand_mean: y.iter().sum::<f64>() / y.len() as f64,
        factors,
    })
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

// 1 = largest delta; equal deltas keep factor order.
fn ranks(deltas: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&a, &b| deltas[b].total_cmp(&deltas[a]).then(a.cmp(&b)));
    let mut out = vec![0; deltas.len()];
    for (rank, &f) in order.iter().enumerate() {
        out[f] = rank + 1;
    }
    out
}

/// Best level of every factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalCombination {
    pub basis: Basis,
    /// 1-based level index per factor.
    pub levels: Vec<usize>,
    /// The factor setting at that level.
    pub settings: Vec<f64>,
}

/// Level with the largest mean per factor (larger-is-better); ties go to
/// the lowest level.
pub fn optimal_combination(t: &ResponseTable, basis: Basis) -> Result<OptimalCombination> {
    let mut levels = Vec::with_capacity(t.factors.len());
    let mut settings = Vec::with_capacity(t.factors.len());
    for f in &t.factors {
        let means = match basis {
            Basis::Raw => &f.raw_means,
            Basis::SN => &f.sn_means,
        };
        if means.is_empty() || means.len() != f.levels.len() {
            return Err(Error::Argument(format!("malformed response table for `{}`", f.factor)));
        }
        let mut best = 0;
        for k in 1..means.len() {
            if means[k] > means[best] {
                best = k;
            }
        }
        levels.push(best + 1);
        settings.push(f.levels[best]);
    }
    Ok(OptimalCombination {
        basis,
        levels,
        settings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDiagnostic {
    pub first: String,
    pub second: String,
    pub orthogonal: bool,
    /// `counts[a][b]`: runs at level a of `first` and level b of `second`.
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDiagnostics {
    pub factors: Vec<String>,
    pub balanced: Vec<bool>,
    pub pairs: Vec<PairDiagnostic>,
}

impl DesignDiagnostics {
    pub fn fully_orthogonal(&self) -> bool {
        self.pairs.iter().all(|p| p.orthogonal)
    }

    /// Human-readable warnings for unbalanced factors and non-orthogonal pairs.
    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .factors
            .iter()
            .zip(&self.balanced)
            .filter(|(_, b)| !**b)
            .map(|(f, _)| format!("factor `{f}` is not balanced: its levels occur unequally often"))
            .collect();
        out.extend(self.pairs.iter().filter(|p| !p.orthogonal).map(|p| {
            format!(
                "factors `{}` and `{}` are not orthogonal: level combinations occur unequally often",
                p.first, p.second
            )
        }));
        out
    }
}

/// Balance per factor and orthogonality per factor pair.
pub fn check_design(d: &Dataset) -> DesignDiagnostics {
    let levels = factor_levels(d);
    let idx: Vec<Vec<usize>> = levels
        .iter()
        .enumerate()
        .map(|(j, fl)| {
            d.runs()
                .iter()
                .map(|r| fl.index_of(r.factors[j]).expect("level present"))
                .collect()
        })
        .collect();

    let balanced = levels
        .iter()
        .zip(&idx)
        .map(|(fl, col)| {
            let mut counts = vec![0usize; fl.levels.len()];
            col.iter().for_each(|&k| counts[k] += 1);
            counts.iter().all(|&c| c == counts[0])
        })
        .collect();

    let mut pairs = Vec::new();
    for a in 0..levels.len() {
        for b in a + 1..levels.len() {
            let mut counts = vec![vec![0usize; levels[b].levels.len()]; levels[a].levels.len()];
            for (&ka, &kb) in idx[a].iter().zip(&idx[b]) {
                counts[ka][kb] += 1;
            }
            let first = counts[0][0];
            let orthogonal = counts.iter().flatten().all(|&c| c == first);
            pairs.push(PairDiagnostic {
                first: levels[a].factor.clone(),
                second: levels[b].factor.clone(),
                orthogonal,
                counts,
            });
        }
    }

    DesignDiagnostics {
        factors: levels.into_iter().map(|fl| fl.factor).collect(),
        balanced,
        pairs,
    }
}

//! Data model, CSV ingestion, the embedded AA 6262 dataset, descriptive
//! statistics and resampling plans.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Column names of the fixed CSV schema, in canonical order.
pub const CSV_COLUMNS: [&str; 4] = ["rpm", "traverse_mm_min", "plan_depth_mm", "hardness"];

/// Default response column.
pub const DEFAULT_RESPONSE: &str = "hardness";

/// Alloy composition ranges (wt %) for the embedded dataset's base metal.
/// Metadata only; nothing is computed from it.
pub const AA6262_COMPOSITION: [(&str, f64, f64); 7] = [
    ("Si", 0.4, 0.8),
    ("Fe", 0.0, 0.7),
    ("Cu", 0.4, 1.4),
    ("Cr", 0.0, 0.2),
    ("Mn", 0.0, 0.15),
    ("Mg", 0.8, 1.2),
    ("Zn", 0.0, 0.25),
];

const AA6262_RUNS: [[f64; 4]; 9] = [
    [800.0, 40.0, 0.1, 65.8],
    [800.0, 50.0, 0.2, 65.78],
    [800.0, 60.0, 0.3, 67.4],
    [1000.0, 40.0, 0.2, 64.3],
    [1000.0, 50.0, 0.3, 69.9],
    [1000.0, 60.0, 0.1, 74.2],
    [1200.0, 40.0, 0.3, 58.3],
    [1200.0, 50.0, 0.2, 60.5],
    [1200.0, 60.0, 0.1, 64.6],
];

/// One experimental observation: factor settings plus the measured response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub factors: Vec<f64>,
    pub response: f64,
}

impl Run {
    pub fn new(factors: Vec<f64>, response: f64) -> Self {
        Self { factors, response }
    }
}

/// An ordered collection of runs. Run order is preserved exactly as ingested
/// and every routine in the crate iterates in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    factor_names: Vec<String>,
    response_name: String,
    runs: Vec<Run>,
}

impl Dataset {
    /// Builds a dataset, checking the structural invariants: at least two
    /// runs, a consistent factor arity and finite values.
    pub fn new(factor_names: Vec<String>, response_name: impl Into<String>, runs: Vec<Run>) -> Result<Self> {
        if runs.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "need at least 2 runs, got {}",
                runs.len()
            )));
        }
        Self::new_unchecked_len(factor_names, response_name.into(), runs)
    }

    /// Like [`Dataset::new`] but accepts a single run. Used for training
    /// subsets (bootstrap samples, CV folds) and tree fitting.
    pub fn subset_of(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InsufficientData("empty subset".into()));
        }
        let runs = indices
            .iter()
            .map(|&i| {
                self.runs
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Argument(format!("run index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new_unchecked_len(self.factor_names.clone(), self.response_name.clone(), runs)
    }

    fn new_unchecked_len(factor_names: Vec<String>, response_name: String, runs: Vec<Run>) -> Result<Self> {
        if factor_names.is_empty() {
            return Err(Error::Schema("at least one factor is required".into()));
        }
        for (i, run) in runs.iter().enumerate() {
            if run.factors.len() != factor_names.len() {
                return Err(Error::Schema(format!(
                    "run {} has {} factors, expected {}",
                    i + 1,
                    run.factors.len(),
                    factor_names.len()
                )));
            }
            if !run.response.is_finite() || run.factors.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("run {} contains a non-finite value", i + 1)));
            }
        }
        Ok(Self {
            factor_names,
            response_name,
            runs,
        })
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn factor_names(&self) -> &[String] {
        &self.factor_names
    }

    pub fn factor_count(&self) -> usize {
        self.factor_names.len()
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn responses(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.response).collect()
    }

    pub fn factor_column(&self, j: usize) -> Vec<f64> {
        self.runs.iter().map(|r| r.factors[j]).collect()
    }

    /// Same runs with every response replaced by `f(response)`.
    pub fn map_responses(&self, f: impl Fn(f64) -> f64) -> Self {
        let runs = self
            .runs
            .iter()
            .map(|r| Run::new(r.factors.clone(), f(r.response)))
            .collect();
        Self {
            factor_names: self.factor_names.clone(),
            response_name: self.response_name.clone(),
            runs,
        }
    }

    /// Swaps the response with the factor called `name`; the old response
    /// takes the factor's place. Returns a clone when `name` already is the
    /// response.
    pub fn with_response(&self, name: &str) -> Result<Self> {
        if name == self.response_name {
            return Ok(self.clone());
        }
        let j = self
            .factor_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Schema(format!("no column `{name}`")))?;
        let mut factor_names = self.factor_names.clone();
        factor_names[j] = self.response_name.clone();
        let runs = self
            .runs
            .iter()
            .map(|r| {
                let mut factors = r.factors.clone();
                let response = std::mem::replace(&mut factors[j], r.response);
                Run::new(factors, response)
            })
            .collect();
        Ok(Self {
            factor_names,
            response_name: name.to_string(),
            runs,
        })
    }

    /// Writes the dataset in the fixed CSV schema. Only datasets whose
    /// columns are exactly the schema columns can be written.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let columns = self.schema_order()?;
        let mut out = String::new();
        out.push_str(&CSV_COLUMNS.join(","));
        out.push('\n');
        for run in &self.runs {
            let cells: Vec<String> = columns
                .iter()
                .map(|c| match c {
                    Some(j) => run.factors[*j].to_string(),
                    None => run.response.to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        let mut f = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        f.write_all(out.as_bytes()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    // For each schema column: Some(factor index) or None for the response.
    fn schema_order(&self) -> Result<Vec<Option<usize>>> {
        CSV_COLUMNS
            .iter()
            .map(|&c| {
                if c == self.response_name {
                    Ok(None)
                } else {
                    self.factor_names
                        .iter()
                        .position(|n| n == c)
                        .map(Some)
                        .ok_or_else(|| Error::Schema(format!("dataset has no column `{c}`")))
                }
            })
            .collect()
    }
}

/// The nine friction-stir-welded AA 6262 runs (rotational speed in rpm,
/// traverse speed in mm/min, plan depth in mm, nugget-zone hardness), in
/// sample-ID order.
pub fn builtin_aa6262() -> Dataset {
    let factor_names = CSV_COLUMNS[..3].iter().map(|s| s.to_string()).collect();
    let runs = AA6262_RUNS
        .iter()
        .map(|r| Run::new(r[..3].to_vec(), r[3]))
        .collect();
    Dataset::new(factor_names, DEFAULT_RESPONSE, runs).expect("embedded dataset is valid")
}

/// Loads a CSV file in the fixed schema with `hardness` as the response.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    load_csv_with_response(path, DEFAULT_RESPONSE)
}

/// Loads a CSV file in the fixed schema. `response` picks which of the four
/// schema columns is the response; the other three become factors in schema
/// order. Header columns may appear in any order. LF and CRLF both work.
pub fn load_csv_with_response(path: &Path, response: &str) -> Result<Dataset> {
    if !CSV_COLUMNS.contains(&response) {
        return Err(Error::Schema(format!(
            "response `{response}` is not one of {}",
            CSV_COLUMNS.join(", ")
        )));
    }
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    for h in &header {
        if !CSV_COLUMNS.contains(&h.as_str()) {
            return Err(Error::Schema(format!("unexpected column `{h}`")));
        }
    }
    let mut positions = [0usize; 4];
    for (slot, name) in positions.iter_mut().zip(CSV_COLUMNS) {
        let found: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| *h == name)
            .map(|(i, _)| i)
            .collect();
        match found.as_slice() {
            [] => return Err(Error::Schema(format!("missing column `{name}`"))),
            [i] => *slot = *i,
            _ => return Err(Error::Schema(format!("duplicate column `{name}`"))),
        }
    }

    let response_slot = CSV_COLUMNS.iter().position(|&c| c == response).unwrap();
    let factor_slots: Vec<usize> = (0..4).filter(|&s| s != response_slot).collect();

    let mut runs = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1;
        let record = record?;
        let mut values = [0.0f64; 4];
        for (slot, name) in CSV_COLUMNS.iter().enumerate() {
            let cell = record.get(positions[slot]).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                value: cell.to_string(),
            })?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "row {row}, column `{name}`: value {cell} must be positive"
                )));
            }
            values[slot] = v;
        }
        runs.push(Run::new(
            factor_slots.iter().map(|&s| values[s]).collect(),
            values[response_slot],
        ));
    }
    let factor_names = factor_slots.iter().map(|&s| CSV_COLUMNS[s].to_string()).collect();
    Dataset::new(factor_names, response, runs)
}

/// Descriptive statistics of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation (divisor n).
    pub std: f64,
}

/// Per-column statistics plus the Pearson correlation matrix over all
/// columns (factors first, response last). `None` marks a correlation that is
/// undefined because one of the columns is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub columns: Vec<ColumnStats>,
    pub correlation: Vec<Vec<Option<f64>>>,
}

pub fn summarize(d: &Dataset) -> SummaryStats {
    let mut names: Vec<String> = d.factor_names().to_vec();
    names.push(d.response_name().to_string());
    let mut data: Vec<Vec<f64>> = (0..d.factor_count()).map(|j| d.factor_column(j)).collect();
    data.push(d.responses());

    let n = d.len() as f64;
    let means: Vec<f64> = data.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let stds: Vec<f64> = data
        .iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt())
        .collect();

    let columns = names
        .into_iter()
        .zip(&data)
        .zip(means.iter().zip(&stds))
        .map(|((name, c), (&mean, &std))| ColumnStats {
            name,
            min: c.iter().copied().fold(f64::INFINITY, f64::min),
            max: c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            std,
        })
        .collect();

    let p = data.len();
    let mut correlation = vec![vec![None; p]; p];
    for a in 0..p {
        for b in a..p {
            if stds[a] == 0.0 || stds[b] == 0.0 {
                continue;
            }
            let r = if a == b {
                1.0
            } else {
                let cov = data[a]
                    .iter()
                    .zip(&data[b])
                    .map(|(x, y)| (x - means[a]) * (y - means[b]))
                    .sum::<f64>()
                    / n;
                (cov / (stds[a] * stds[b])).clamp(-1.0, 1.0)
            };
            correlation[a][b] = Some(r);
            correlation[b][a] = Some(r);
        }
    }
    SummaryStats { columns, correlation }
}

/// Assignment of runs to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// `assignments[i]` is the fold of run `i`.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn run_count(&self) -> usize {
        self.assignments.len()
    }

    /// Held-out runs of `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Training runs of `fold` (the complement), ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles run indices under `seed` and deals them round-robin into `k`
/// folds. `k == n` is leave-one-out.
pub fn kfold_plan(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::Argument(format!("fold count {k} must satisfy 2 <= k <= {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::seeded(seed), &mut order);
    let mut assignments = vec![0; n];
    for (pos, &run) in order.iter().enumerate() {
        assignments[run] = pos % k;
    }
    Ok(FoldPlan { k, assignments })
}

/// Leave-one-out plan: run `i` is alone in fold `i`.
pub fn leave_one_out_plan(n: usize) -> Result<FoldPlan> {
    if n < 2 {
        return Err(Error::Argument("leave-one-out needs at least 2 runs".into()));
    }
    Ok(FoldPlan {
        k: n,
        assignments: (0..n).collect(),
    })
}

/// `n` indices drawn uniformly with replacement from `[0, n)`.
pub fn bootstrap_indices(n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Argument("bootstrap of zero runs".into()));
    }
    let mut rng = rng::seeded(seed);
    Ok((0..n).map(|_| rng::below(&mut rng, n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn builtin_rows() {
        let d = builtin_aa6262();
        assert_eq!(d.len(), 9);
        assert_eq!(d.runs()[0], Run::new(vec![800.0, 40.0, 0.1], 65.8));
        assert_eq!(d.runs()[6], Run::new(vec![1200.0, 40.0, 0.3], 58.3));
        let total: f64 = d.responses().iter().sum();
        assert!((total - 590.78).abs() < 1e-9);
    }

    #[test]
    fn load_transcribed_table() {
        let mut text = String::from("rpm,traverse_mm_min,plan_depth_mm,hardness\r\n");
        for r in AA6262_RUNS {
            text.push_str(&format!("{},{},{},{}\r\n", r[0], r[1], r[2], r[3]));
        }
        let f = write_tmp(&text);
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d, builtin_aa6262());
        assert_eq!(d.runs()[5].response, 74.2);
    }

    #[test]
    fn header_only_is_insufficient() {
        let f = write_tmp("rpm,traverse_mm_min,plan_depth_mm,hardness\n");
        assert!(matches!(load_csv(f.path()), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn non_numeric_cell_cites_row() {
        let f = write_tmp(
            "rpm,traverse_mm_min,plan_depth_mm,hardness\n800,40,0.1,65.8\n800,50,0.2,65.78\n800,60,0.3,abc\n",
        );
        match load_csv(f.path()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "hardness");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_and_extra_columns() {
        let f = write_tmp("rpm,traverse_mm_min,hardness\n1,2,3\n4,5,6\n");
        match load_csv(f.path()) {
            Err(Error::Schema(msg)) => assert!(msg.contains("plan_depth_mm")),
            other => panic!("unexpected {other:?}"),
        }
        let f = write_tmp("rpm,traverse_mm_min,plan_depth_mm,hardness,operator\n1,2,3,4,5\n1,2,3,4,5\n");
        assert!(matches!(load_csv(f.path()), Err(Error::Schema(_))));
    }

    #[test]
    fn alternate_response_column() {
        let d = builtin_aa6262();
        let f = tempfile::NamedTempFile::new().unwrap();
        d.write_csv(f.path()).unwrap();
        let alt = load_csv_with_response(f.path(), "rpm").unwrap();
        assert_eq!(alt.factor_names(), ["traverse_mm_min", "plan_depth_mm", "hardness"]);
        assert_eq!(alt.runs()[0].response, 800.0);
        let swapped = d.with_response("rpm").unwrap();
        assert_eq!(swapped.runs()[0], Run::new(vec![65.8, 40.0, 0.1], 800.0));
        assert_eq!(swapped.with_response("hardness").unwrap(), d);
        assert!(d.with_response("operator").is_err());
    }

    #[test]
    fn summary_of_builtin() {
        let s = summarize(&builtin_aa6262());
        let h = &s.columns[3];
        assert!((h.mean - 65.6422).abs() < 1e-4);
        assert_eq!(h.max, 74.2);
        assert_eq!(h.min, 58.3);
        for i in 0..4 {
            assert!((s.correlation[i][i].unwrap() - 1.0).abs() < 1e-12);
            for j in 0..4 {
                assert_eq!(s.correlation[i][j], s.correlation[j][i]);
            }
        }
    }

    #[test]
    fn summary_of_identical_runs() {
        let run = Run::new(vec![800.0, 40.0, 0.1], 65.8);
        let d = Dataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            "y",
            vec![run.clone(), run],
        )
        .unwrap();
        let s = summarize(&d);
        assert!(s.columns.iter().all(|c| c.std == 0.0));
        assert!(s.correlation.iter().flatten().all(Option::is_none));
    }

    #[test]
    fn fold_sizes() {
        let loo = kfold_plan(9, 9, 5).unwrap();
        assert!(loo.fold_sizes().iter().all(|&s| s == 1));
        assert_eq!(kfold_plan(9, 3, 42).unwrap().fold_sizes(), vec![3, 3, 3]);
        let mut sizes = kfold_plan(10, 3, 42).unwrap().fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert!(kfold_plan(5, 6, 0).is_err());
        assert!(kfold_plan(5, 1, 0).is_err());
    }

    #[test]
    fn bootstrap_basics() {
        assert_eq!(bootstrap_indices(1, 99).unwrap(), vec![0]);
        assert_eq!(bootstrap_indices(9, 4).unwrap(), bootstrap_indices(9, 4).unwrap());
        assert!(bootstrap_indices(0, 4).is_err());
    }

    #[test]
    fn bootstrap_distinct_fraction() {
        // E[distinct / n] = 1 - (1 - 1/n)^n
        let n = 9;
        let expected = 1.0 - (1.0 - 1.0 / n as f64).powi(n as i32);
        let trials = 4000;
        let mut acc = 0.0;
        for seed in 0..trials {
            let mut idx = bootstrap_indices(n, seed).unwrap();
            idx.sort_unstable();
            idx.dedup();
            acc += idx.len() as f64 / n as f64;
        }
        let mean = acc / trials as f64;
        assert!((expected - 0.653).abs() < 1e-3);
        assert!((mean - expected).abs() < 0.02, "mean {mean}");
    }
}

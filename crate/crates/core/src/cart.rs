//! Purity measures (entropy, information gain, gain ratio, Gini impurity) and
//! a CART regression tree grown by variance reduction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numfmt::sig6;
use crate::rng::{self, DetRng};

/// Class counts of a labelled set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDistribution {
    counts: Vec<usize>,
}

impl ClassDistribution {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    /// Counts of each distinct label, in label order.
    pub fn from_labels<T: Ord>(labels: &[T]) -> Self {
        let mut map = BTreeMap::new();
        for l in labels {
            *map.entry(l).or_insert(0usize) += 1;
        }
        Self {
            counts: map.into_values().collect(),
        }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// pᵢ = countᵢ / total; empty for an empty set.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total();
        if total == 0 {
            return Vec::new();
        }
        self.counts.iter().map(|&c| c as f64 / total as f64).collect()
    }
}

/// A parent set and the children a split produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPartition {
    parent: ClassDistribution,
    children: Vec<ClassDistribution>,
}

impl SplitPartition {
    /// Partition from per-child count vectors over a shared class index.
    /// The parent is the class-wise sum of the children.
    pub fn from_child_counts(children: Vec<Vec<usize>>) -> Result<Self> {
        let classes = children.iter().map(Vec::len).max().unwrap_or(0);
        if children.is_empty() || classes == 0 {
            return Err(Error::Argument("partition needs at least one child".into()));
        }
        let mut parent = vec![0usize; classes];
        for child in &children {
            for (p, c) in parent.iter_mut().zip(child) {
                *p += c;
            }
        }
        if parent.iter().sum::<usize>() == 0 {
            return Err(Error::Argument("partition of an empty set".into()));
        }
        Ok(Self {
            parent: ClassDistribution::from_counts(parent),
            children: children.into_iter().map(ClassDistribution::from_counts).collect(),
        })
    }

    /// Partition from labelled groups, e.g. `[["A","A"], ["B","B"]]`.
    pub fn from_groups<T: Ord + Clone>(groups: &[Vec<T>]) -> Result<Self> {
        let mut classes: Vec<T> = groups.iter().flatten().cloned().collect();
        classes.sort();
        classes.dedup();
        let children = groups
            .iter()
            .map(|g| {
                let mut counts = vec![0usize; classes.len()];
                for label in g {
                    counts[classes.binary_search(label).expect("label indexed")] += 1;
                }
                counts
            })
            .collect();
        Self::from_child_counts(children)
    }

    pub fn parent(&self) -> &ClassDistribution {
        &self.parent
    }

    pub fn children(&self) -> &[ClassDistribution] {
        &self.children
    }

    /// wⱼ = |childⱼ| / |parent|.
    pub fn weights(&self) -> Vec<f64> {
        let total = self.parent.total() as f64;
        self.children.iter().map(|c| c.total() as f64 / total).collect()
    }

    /// SplitInfo = -Σ wⱼ log2 wⱼ over non-empty children.
    pub fn split_info(&self) -> f64 {
        -self
            .weights()
            .into_iter()
            .filter(|&w| w > 0.0)
            .map(|w| w * w.log2())
            .sum::<f64>()
    }
}

/// Shannon entropy in bits, with 0·log2 0 = 0.
pub fn entropy(dist: &ClassDistribution) -> f64 {
    -dist
        .frequencies()
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>()
}

/// Entropy before the split minus the size-weighted entropy after it.
pub fn information_gain(split: &SplitPartition) -> f64 {
    let after: f64 = split
        .weights()
        .into_iter()
        .zip(split.children())
        .map(|(w, c)| if w > 0.0 { w * entropy(c) } else { 0.0 })
        .sum();
    entropy(split.parent()) - after
}

/// Information gain normalized by SplitInfo.
pub fn gain_ratio(split: &SplitPartition) -> Result<f64> {
    let non_empty = split.children().iter().filter(|c| c.total() > 0).count();
    if non_empty < 2 {
        return Err(Error::UndefinedRatio);
    }
    Ok(information_gain(split) / split.split_info())
}

/// 1 - Σ pᵢ².
pub fn gini_impurity(dist: &ClassDistribution) -> f64 {
    1.0 - dist.frequencies().into_iter().map(|p| p * p).sum::<f64>()
}

/// Growth limits for a regression tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Maximum depth; 0 means unlimited.
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Minimum variance reduction required at a node to split it.
    pub min_impurity_decrease: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 0,
            min_samples_leaf: 1,
            min_impurity_decrease: 0.0,
        }
    }
}

impl TreeConfig {
    pub fn with_max_depth(max_depth: usize) -> Self {
        Self {
            max_depth,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_impurity_decrease >= 0.0) {
            return Err(Error::Argument("min_impurity_decrease must be >= 0".into()));
        }
        Ok(())
    }
}

/// A node of a fitted regression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
        n_samples: usize,
    },
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: f64,
        /// Node variance minus size-weighted child variance.
        impurity_decrease: f64,
        n_samples: usize,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn n_samples(&self) -> usize {
        match self {
            Self::Leaf { n_samples, .. } | Self::Split { n_samples, .. } => *n_samples,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Self::Leaf { value, .. } => return *value,
                Self::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Self::Leaf { .. } => 1,
            Self::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn split_count(&self) -> usize {
        match self {
            Self::Leaf { .. } => 0,
            Self::Split { left, right, .. } => 1 + left.split_count() + right.split_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Leaf { .. } => 0,
            Self::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Adds n_node · decrease to each split feature's slot (unnormalized
    /// importance; divide by the root sample count for node fractions).
    pub fn accumulate_importance(&self, out: &mut [f64]) {
        if let Self::Split {
            feature,
            impurity_decrease,
            n_samples,
            left,
            right,
            ..
        } = self
        {
            out[*feature] += *n_samples as f64 * impurity_decrease;
            left.accumulate_importance(out);
            right.accumulate_importance(out);
        }
    }
}

/// A fitted tree together with its input schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub feature_names: Vec<String>,
    pub root: TreeNode,
}

impl RegressionTree {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_arity(x, self.n_features())?;
        Ok(self.root.predict(x))
    }

    /// Per-feature (node fraction × impurity decrease), not normalized.
    pub fn raw_importance(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_features()];
        self.root.accumulate_importance(&mut out);
        let n = self.root.n_samples() as f64;
        out.iter_mut().for_each(|v| *v /= n);
        out
    }
}

pub(crate) fn check_arity(x: &[f64], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Argument(format!(
            "feature vector has {} entries, model expects {expected}",
            x.len()
        )));
    }
    Ok(())
}

/// Two split scores closer than this fraction of the node SSE count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// How candidate features are chosen at each node.
pub(crate) enum FeatureSampling<'a> {
    All,
    Subset { rng: &'a mut DetRng, m: usize },
}

pub(crate) struct Grower<'a> {
    pub rows: &'a [&'a [f64]],
    pub targets: &'a [f64],
    pub cfg: TreeConfig,
    /// Leaf value = Σ targets / (n + leaf_penalty).
    pub leaf_penalty: f64,
    pub sampling: FeatureSampling<'a>,
}

impl Grower<'_> {
    pub fn grow(&mut self, indices: &[usize]) -> TreeNode {
        self.node(indices, 0)
    }

    fn leaf(&self, indices: &[usize]) -> TreeNode {
        let sum: f64 = indices.iter().map(|&i| self.targets[i]).sum();
        TreeNode::Leaf {
            value: sum / (indices.len() as f64 + self.leaf_penalty),
            n_samples: indices.len(),
        }
    }

    fn node(&mut self, indices: &[usize], depth: usize) -> TreeNode {
        let n = indices.len();
        let min_leaf = self.cfg.min_samples_leaf.max(1);
        let first = self.targets[indices[0]];
        let constant = indices.iter().all(|&i| self.targets[i] == first);
        if constant || n < 2 * min_leaf || (self.cfg.max_depth > 0 && depth >= self.cfg.max_depth) {
            return self.leaf(indices);
        }

        let p = self.rows[indices[0]].len();
        let features = match &mut self.sampling {
            FeatureSampling::All => (0..p).collect(),
            FeatureSampling::Subset { rng, m } => rng::subset(rng, p, *m),
        };

        let best = match best_split(self.rows, self.targets, indices, &features, min_leaf) {
            Some(b) => b,
            None => return self.leaf(indices),
        };
        let decrease = best.parent_sse - best.child_sse;
        let impurity_decrease = decrease / n as f64;
        if !(decrease > TIE_TOLERANCE * best.parent_sse) || impurity_decrease <= self.cfg.min_impurity_decrease {
            return self.leaf(indices);
        }

        let (left, right): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.rows[i][best.feature] <= best.threshold);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            impurity_decrease,
            n_samples: n,
            left: Box::new(self.node(&left, depth + 1)),
            right: Box::new(self.node(&right, depth + 1)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    parent_sse: f64,
    child_sse: f64,
}

// Lowest child SSE wins; among scores within the tie tolerance the earliest
// (lowest feature, then lowest threshold) is kept.
fn best_split(
    rows: &[&[f64]],
    targets: &[f64],
    indices: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let n = indices.len();
    let mean = indices.iter().map(|&i| targets[i]).sum::<f64>() / n as f64;
    let parent_sse: f64 = indices.iter().map(|&i| (targets[i] - mean).powi(2)).sum();
    let tol = TIE_TOLERANCE * parent_sse;

    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = indices.to_vec();
    for &f in features {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
        // suffix sums of centered targets make the right-child SSE O(1)
        let centered: Vec<f64> = order.iter().map(|&i| targets[i] - mean).collect();
        let total_s1: f64 = centered.iter().sum();
        let total_s2: f64 = centered.iter().map(|c| c * c).sum();
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 1..n {
            s1 += centered[k - 1];
            s2 += centered[k - 1] * centered[k - 1];
            let lo = rows[order[k - 1]][f];
            let hi = rows[order[k]][f];
            if lo == hi || k < min_leaf || n - k < min_leaf {
                continue;
            }
            let nl = k as f64;
            let nr = (n - k) as f64;
            let (r1, r2) = (total_s1 - s1, total_s2 - s2);
            let sse = (s2 - s1 * s1 / nl).max(0.0) + (r2 - r1 * r1 / nr).max(0.0);
            if best.map_or(true, |b| sse < b.child_sse - tol) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    parent_sse,
                    child_sse: sse,
                });
            }
        }
    }
    best
}

/// Midpoint of two consecutive distinct values, kept strictly below `hi`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Feature rows of a dataset as slices.
pub(crate) fn feature_rows(d: &Dataset) -> Vec<&[f64]> {
    d.runs().iter().map(|r| r.factors.as_slice()).collect()
}

/// Grows a regression tree on every run of `d`.
pub fn fit_regression_tree(d: &Dataset, cfg: &TreeConfig) -> Result<RegressionTree> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::Argument("cannot fit a tree to an empty dataset".into()));
    }
    let rows = feature_rows(d);
    let targets = d.responses();
    let indices: Vec<usize> = (0..d.len()).collect();
    let mut grower = Grower {
        rows: &rows,
        targets: &targets,
        cfg: *cfg,
        leaf_penalty: 0.0,
        sampling: FeatureSampling::All,
    };
    Ok(RegressionTree {
        feature_names: d.factor_names().to_vec(),
        root: grower.grow(&indices),
    })
}

pub fn predict_tree(t: &RegressionTree, x: &[f64]) -> Result<f64> {
    t.predict(x)
}

/// Output format of [`export_tree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// One line per node, children indented under their parent.
    Text,
    /// Graphviz DOT digraph.
    Graph,
}

pub fn export_tree(t: &RegressionTree, format: ExportFormat) -> String {
    let mut out = String::new();
    match format {
        ExportFormat::Text => text_node(&t.root, &t.feature_names, 0, "", &mut out),
        ExportFormat::Graph => {
            out.push_str("digraph tree {\n  node [shape=box];\n");
            let mut next = 0;
            dot_node(&t.root, &t.feature_names, &mut next, &mut out);
            out.push_str("}\n");
        }
    }
    out
}

fn feature_label(names: &[String], f: usize) -> String {
    names.get(f).cloned().unwrap_or_else(|| format!("x{f}"))
}

fn text_node(node: &TreeNode, names: &[String], depth: usize, prefix: &str, out: &mut String) {
    let indent = "  ".repeat(depth);
    match node {
        TreeNode::Leaf { value, n_samples } => {
            let _ = writeln!(out, "{indent}{prefix}value = {} (n = {n_samples})", sig6(*value));
        }
        TreeNode::Split {
            feature,
            threshold,
            impurity_decrease,
            n_samples,
            left,
            right,
        } => {
            let _ = writeln!(
                out,
                "{indent}{prefix}if {} <= {} (n = {n_samples}, decrease = {})",
                feature_label(names, *feature),
                sig6(*threshold),
                sig6(*impurity_decrease)
            );
            text_node(left, names, depth + 1, "then: ", out);
            text_node(right, names, depth + 1, "else: ", out);
        }
    }
}

fn dot_node(node: &TreeNode, names: &[String], next: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    match node {
        TreeNode::Leaf { value, n_samples } => {
            let _ = writeln!(out, "  n{id} [label=\"value = {}\\nn = {n_samples}\"];", sig6(*value));
        }
        TreeNode::Split {
            feature,
            threshold,
            n_samples,
            left,
            right,
            ..
        } => {
            let _ = writeln!(
                out,
                "  n{id} [label=\"{} <= {}\\nn = {n_samples}\"];",
                feature_label(names, *feature),
                sig6(*threshold)
            );
            let l = dot_node(left, names, next, out);
            let r = dot_node(right, names, next, out);
            let _ = writeln!(out, "  n{id} -> n{l} [label=\"yes\"];");
            let _ = writeln!(out, "  n{id} -> n{r} [label=\"no\"];");
        }
    }
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{builtin_aa6262, Run};

    fn dist(counts: &[usize]) -> ClassDistribution {
        ClassDistribution::from_counts(counts.to_vec())
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&dist(&[1, 1])) - 1.0).abs() < 1e-12);
        assert_eq!(entropy(&dist(&[5])), 0.0);
        assert!((entropy(&dist(&[1, 1, 1, 1])) - 2.0).abs() < 1e-12);
        assert_eq!(entropy(&dist(&[3, 0])), 0.0);
    }

    #[test]
    fn gain_examples() {
        let perfect = SplitPartition::from_groups(&[vec!["A", "A"], vec!["B", "B"]]).unwrap();
        assert!((information_gain(&perfect) - 1.0).abs() < 1e-12);
        assert!((gain_ratio(&perfect).unwrap() - 1.0).abs() < 1e-12);

        let noop = SplitPartition::from_groups(&[vec!["A", "B", "B"]]).unwrap();
        assert!(information_gain(&noop).abs() < 1e-12);
        assert!(matches!(gain_ratio(&noop), Err(Error::UndefinedRatio)));

        let partial = SplitPartition::from_groups(&[vec!["A", "A"], vec!["A", "B"]]).unwrap();
        assert!((information_gain(&partial) - 0.3113).abs() < 1e-4);

        let four = SplitPartition::from_groups(&[vec![1], vec![2], vec![3], vec![4]]).unwrap();
        assert!((information_gain(&four) - 2.0).abs() < 1e-12);
        assert!((four.split_info() - 2.0).abs() < 1e-12);
        assert!((gain_ratio(&four).unwrap() - 1.0).abs() < 1e-12);

        let balanced_zero = SplitPartition::from_groups(&[vec!["A", "B"], vec!["A", "B"]]).unwrap();
        assert_eq!(gain_ratio(&balanced_zero).unwrap(), 0.0);
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini_impurity(&dist(&[4])), 0.0);
        assert!((gini_impurity(&dist(&[1, 1])) - 0.5).abs() < 1e-15);
        assert!((gini_impurity(&dist(&[1, 1, 1])) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn full_tree_fits_builtin_exactly() {
        let d = builtin_aa6262();
        let t = fit_regression_tree(&d, &TreeConfig::default()).unwrap();
        for run in d.runs() {
            assert_eq!(t.predict(&run.factors).unwrap(), run.response);
        }
        assert_eq!(t.root.leaf_count(), 9);
        assert_eq!(t.root.split_count(), t.root.leaf_count() - 1);
        assert_eq!(t.predict(&d.runs()[5].factors).unwrap(), 74.2);
    }

    #[test]
    fn degenerate_trees() {
        let one = Dataset::new(vec!["a".into()], "y", vec![Run::new(vec![1.0], 3.0), Run::new(vec![2.0], 4.0)])
            .unwrap()
            .subset_of(&[0])
            .unwrap();
        let t = fit_regression_tree(&one, &TreeConfig::default()).unwrap();
        assert_eq!(t.root, TreeNode::Leaf { value: 3.0, n_samples: 1 });

        let flat = builtin_aa6262().map_responses(|_| 7.0);
        let t = fit_regression_tree(&flat, &TreeConfig::default()).unwrap();
        assert_eq!(t.root, TreeNode::Leaf { value: 7.0, n_samples: 9 });
        assert_eq!(t.predict(&[1.0, 2.0, 3.0]).unwrap(), 7.0);
        assert!(t.predict(&[1.0]).is_err());
    }

    #[test]
    fn threshold_goes_left() {
        let runs = vec![Run::new(vec![1.0], 10.0), Run::new(vec![3.0], 20.0)];
        let d = Dataset::new(vec!["x".into()], "y", runs).unwrap();
        let t = fit_regression_tree(&d, &TreeConfig::default()).unwrap();
        match &t.root {
            TreeNode::Split { threshold, .. } => {
                assert_eq!(*threshold, 2.0);
                assert_eq!(t.predict(&[2.0]).unwrap(), 10.0);
                assert_eq!(t.predict(&[2.0000001]).unwrap(), 20.0);
            }
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn depth_and_leaf_limits() {
        let d = builtin_aa6262();
        let stump = fit_regression_tree(&d, &TreeConfig::with_max_depth(1)).unwrap();
        assert_eq!(stump.root.depth(), 1);
        let text = export_tree(&stump, ExportFormat::Text);
        assert_eq!(text.lines().count(), 3);
        let cfg = TreeConfig {
            min_samples_leaf: 3,
            ..TreeConfig::default()
        };
        let t = fit_regression_tree(&d, &cfg).unwrap();
        fn min_leaf(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { n_samples, .. } => *n_samples,
                TreeNode::Split { left, right, .. } => min_leaf(left).min(min_leaf(right)),
            }
        }
        assert!(min_leaf(&t.root) >= 3);
    }

    #[test]
    fn export_formats() {
        let leaf = RegressionTree {
            feature_names: vec!["rpm".into()],
            root: TreeNode::Leaf { value: 65.8, n_samples: 1 },
        };
        let text = export_tree(&leaf, ExportFormat::Text);
        assert_eq!(text, "value = 65.8 (n = 1)\n");

        let t = fit_regression_tree(&builtin_aa6262(), &TreeConfig::default()).unwrap();
        let dot = export_tree(&t, ExportFormat::Graph);
        assert!(dot.starts_with("digraph tree {"));
        assert_eq!(dot.matches("->").count(), 2 * t.root.split_count());
        assert_eq!(export_tree(&t, ExportFormat::Text).lines().count(), 17);
    }
}

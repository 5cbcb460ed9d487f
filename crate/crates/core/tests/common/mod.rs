//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the routines it is used to check.

#![allow(dead_code)]

use rand::Rng;
use weldopt_core::dataset::{Dataset, Run};
use weldopt_core::rng::seeded;

/// Values from a pseudo-inverse least-squares fit of the builtin runs under
/// treatment (dummy) coding, computed outside this crate.
pub mod golden {
    pub const SST: f64 = 177.736_355_555_556;
    pub const SSE: f64 = 1.333_475_555_556;
    /// rpm, traverse_mm_min, plan_depth_mm
    pub const ADJ_SS: [f64; 3] = [106.274_755_555_556, 36.488_035_555_556, 17.042_702_222_222];
    pub const PRESS: f64 = 43.813_532_812_496;
}

/// Γ(k/2) for a positive integer k.
pub fn gamma_half(k: u32) -> f64 {
    let (mut value, mut z) = if k % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while z < k as f64 / 2.0 {
        value *= z;
        z += 1.0;
    }
    value
}

/// Density of the F(d1, d2) distribution.
pub fn f_density(x: f64, d1: u32, d2: u32) -> f64 {
    let (a, b) = (d1 as f64, d2 as f64);
    let beta = gamma_half(d1) * gamma_half(d2) / gamma_half(d1 + d2);
    let log = 0.5 * (a * (a * x).ln() + b * b.ln() - (a + b) * (a * x + b).ln());
    log.exp() / (x * beta)
}

/// P(F > f) by quadrature of the density. The tail [f, ∞) is mapped onto
/// v ∈ (0, 1] with x = f - 1 + 1/v², which leaves a smooth integrand;
/// composite 5-point Gauss-Legendre over 4000 panels.
pub fn f_tail_quadrature(f: f64, d1: u32, d2: u32) -> f64 {
    const NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    let panels = 4000;
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (t, w) in NODES.iter().zip(WEIGHTS) {
            let v = mid + 0.5 * h * t;
            let x = f - 1.0 + 1.0 / (v * v);
            total += w * 0.5 * h * f_density(x, d1, d2) * 2.0 / (v * v * v);
        }
    }
    total
}

/// Entropy of raw class counts, evaluated directly from the definition.
pub fn entropy_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    h
}

/// Reference tree as a plain structure for comparisons.
#[derive(Debug, Clone)]
pub enum RefNode {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: Box<RefNode>, right: Box<RefNode> },
}

fn two_pass_sse(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum()
}

/// Exhaustive split search: every feature, every midpoint between
/// consecutive distinct values, child SSE evaluated from scratch. Scores
/// within 1e-9 × node SSE are treated as ties and the first one enumerated
/// (lowest feature, then lowest threshold) is kept.
pub fn brute_force_tree(x: &[Vec<f64>], y: &[f64], idx: &[usize]) -> RefNode {
    let vals: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    if idx.len() < 2 || vals.iter().all(|&v| v == vals[0]) {
        return RefNode::Leaf(mean);
    }
    let parent = two_pass_sse(&vals);
    let tol = 1e-9 * parent;
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x[0].len() {
        let mut levels: Vec<f64> = idx.iter().map(|&i| x[i][f]).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        for w in levels.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<f64> = idx.iter().filter(|&&i| x[i][f] <= t).map(|&i| y[i]).collect();
            let right: Vec<f64> = idx.iter().filter(|&&i| x[i][f] > t).map(|&i| y[i]).collect();
            let score = two_pass_sse(&left) + two_pass_sse(&right);
            if best.map_or(true, |(_, _, s)| score < s - tol) {
                best = Some((f, t, score));
            }
        }
    }
    match best {
        Some((f, t, score)) if parent - score > tol => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][f] <= t);
            RefNode::Split {
                feature: f,
                threshold: t,
                left: Box::new(brute_force_tree(x, y, &l)),
                right: Box::new(brute_force_tree(x, y, &r)),
            }
        }
        _ => RefNode::Leaf(mean),
    }
}

/// Random small dataset: `n` runs, `p` features on a coarse integer grid
/// (so ties and repeated vectors occur), responses with one decimal.
pub fn random_dataset(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = seeded(seed);
    let x = (0..n).map(|_| (0..p).map(|_| rng.gen_range(0..4) as f64).collect()).collect();
    let y = (0..n).map(|_| (rng.gen_range(500..800) as f64) / 10.0).collect();
    (x, y)
}

pub fn to_dataset(x: &[Vec<f64>], y: &[f64]) -> Dataset {
    let names = (0..x[0].len()).map(|j| format!("x{j}")).collect();
    let runs: Vec<Run> = x.iter().zip(y).map(|(r, &v)| Run::new(r.clone(), v)).collect();
    if runs.len() >= 2 {
        Dataset::new(names, "y", runs).unwrap()
    } else {
        let mut padded = runs.clone();
        padded.push(runs[0].clone());
        Dataset::new(names, "y", padded).unwrap().subset_of(&[0]).unwrap()
    }
}

/// Plain least squares by the textbook normal-equation-free route: modified
/// Gram-Schmidt QR, then back substitution. Returns SSE.
pub fn qr_sse(x: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = x.len();
    let p = x[0].len();
    let mut q: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| x[i][j]).collect()).collect();
    let mut resid = y.to_vec();
    for j in 0..p {
        for k in 0..j {
            let dot: f64 = (0..n).map(|i| q[k][i] * q[j][i]).sum();
            for i in 0..n {
                q[j][i] -= dot * q[k][i];
            }
        }
        let norm = (0..n).map(|i| q[j][i] * q[j][i]).sum::<f64>().sqrt();
        if norm < 1e-10 {
            q[j].iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        q[j].iter_mut().for_each(|v| *v /= norm);
        let proj: f64 = (0..n).map(|i| q[j][i] * resid[i]).sum();
        for i in 0..n {
            resid[i] -= proj * q[j][i];
        }
    }
    resid.iter().map(|r| r * r).sum()
}

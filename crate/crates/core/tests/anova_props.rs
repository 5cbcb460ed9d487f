mod common;

use common::golden;
use proptest::prelude::*;
use weldopt_core::anova::{anova_table, design_matrix, fit_glm, model_summary, press};
use weldopt_core::dataset::{builtin_aa6262, Dataset, Run};
use weldopt_core::special::f_survival;

#[test]
fn builtin_matches_pseudo_inverse_oracle() {
    let fit = fit_glm(&builtin_aa6262()).unwrap();
    assert!((fit.sst - golden::SST).abs() < 1e-9);
    assert!((fit.sse - golden::SSE).abs() < 1e-9);
    let table = anova_table(&fit).unwrap();
    for (row, want) in table.sources.iter().zip(golden::ADJ_SS) {
        assert!((row.adj_ss - want).abs() < 1e-6, "{}: {} vs {want}", row.source, row.adj_ss);
    }
    assert!((press(&fit).unwrap() - golden::PRESS).abs() < 1e-6);
    let s = model_summary(&fit).unwrap();
    assert!(s.predicted_r_squared.unwrap() <= s.r_squared);
    assert!(s.adj_r_squared <= s.r_squared);
}

#[test]
fn residuals_orthogonal_to_design() {
    let fit = fit_glm(&builtin_aa6262()).unwrap();
    for c in 0..fit.parameter_count() {
        let dot: f64 = fit.design.iter().zip(&fit.residuals).map(|(row, e)| row[c] * e).sum();
        assert!(dot.abs() < 1e-8);
    }
}

#[test]
fn f_survival_matches_quadrature() {
    for d1 in [1, 2, 3, 5] {
        for d2 in [1, 2, 3, 5] {
            for f in [0.5, 1.0, 2.0, 10.0] {
                let got = f_survival(f, d1 as f64, d2 as f64).unwrap();
                let want = common::f_tail_quadrature(f, d1, d2);
                assert!((got - want).abs() < 1e-6, "F({d1},{d2}) at {f}: {got} vs {want}");
            }
        }
    }
}

fn arb_design() -> impl Strategy<Value = Dataset> {
    // 3 factors, 2-3 levels each, 8-14 runs, random responses
    (8usize..15, prop::collection::vec(2usize..4, 3)).prop_flat_map(|(n, levels)| {
        let rows = prop::collection::vec(
            (0..levels[0], 0..levels[1], 0..levels[2], 10.0f64..90.0),
            n,
        );
        rows.prop_filter_map("every level must appear", move |rows| {
            for (j, &l) in levels.iter().enumerate() {
                for k in 0..l {
                    let present = rows.iter().any(|r| [r.0, r.1, r.2][j] == k);
                    if !present {
                        return None;
                    }
                }
            }
            let runs = rows
                .into_iter()
                .map(|(a, b, c, y)| Run::new(vec![a as f64 + 1.0, b as f64 + 1.0, c as f64 + 1.0], y))
                .collect();
            Dataset::new(vec!["a".into(), "b".into(), "c".into()], "y", runs).ok()
        })
    })
}

proptest! {
    #[test]
    fn adjusted_ss_nonnegative_and_matches_qr(d in arb_design()) {
        let fit = match fit_glm(&d) {
            Ok(f) => f,
            Err(_) => return Ok(()), // confounded random design
        };
        prop_assume!(fit.error_df >= 1);
        let table = anova_table(&fit).unwrap();
        let (_, design, owner) = design_matrix(&d).unwrap();
        let y = d.responses();
        let full = common::qr_sse(&design, &y);
        prop_assert!((full - fit.sse).abs() < 1e-6 * (1.0 + fit.sst));
        for (j, row) in table.sources.iter().enumerate() {
            prop_assert!(row.adj_ss >= -1e-9);
            let reduced: Vec<Vec<f64>> = design
                .iter()
                .map(|r| (0..r.len()).filter(|&c| owner[c] != Some(j)).map(|c| r[c]).collect())
                .collect();
            let want = common::qr_sse(&reduced, &y) - full;
            prop_assert!((row.adj_ss - want).abs() < 1e-6 * (1.0 + fit.sst));
            prop_assert!(row.p_value > 0.0 && row.p_value <= 1.0);
            prop_assert!((row.adj_ms - row.adj_ss / row.df as f64).abs() <= 1e-9 * row.adj_ms.abs().max(1.0));
        }
        if fit.hat_diagonal.iter().all(|&h| h < 1.0 - 1e-9) {
            let s = model_summary(&fit).unwrap();
            prop_assert!(s.predicted_r_squared.unwrap() <= s.r_squared + 1e-12);
        }
        let trace: f64 = fit.hat_diagonal.iter().sum();
        prop_assert!((trace - fit.parameter_count() as f64).abs() < 1e-9);
        prop_assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn f_survival_decreasing(f in 0.0f64..50.0, step in 0.01f64..5.0, d1 in 1u32..8, d2 in 1u32..8) {
        let a = f_survival(f, d1 as f64, d2 as f64).unwrap();
        let b = f_survival(f + step, d1 as f64, d2 as f64).unwrap();
        prop_assert!(b < a);
    }
}

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use weldopt_core::anova::{anova_table, fit_glm, model_summary};
use weldopt_core::cart::{fit_regression_tree, TreeConfig};
use weldopt_core::dataset::{builtin_aa6262, leave_one_out_plan};
use weldopt_core::ensemble::{cross_validate, fit_gbm, fit_random_forest, ForestParams, ModelSpec};
use weldopt_core::special::f_survival;

fn bench(c: &mut Criterion) {
    let d = builtin_aa6262();
    let cfg = TreeConfig::default();

    c.bench_function("tree_fit", |b| b.iter(|| fit_regression_tree(black_box(&d), &cfg).unwrap()));
    c.bench_function("forest_fit_200", |b| {
        b.iter(|| fit_random_forest(black_box(&d), 200, &cfg, 3, 7).unwrap())
    });
    c.bench_function("gbm_fit_100", |b| {
        b.iter(|| fit_gbm(black_box(&d), 100, &TreeConfig::with_max_depth(3), 0.1, 0.0, 0).unwrap())
    });
    c.bench_function("f_survival", |b| {
        b.iter(|| f_survival(black_box(3.7), black_box(4.0), black_box(11.0)).unwrap())
    });
    c.bench_function("glm_anova_summary", |b| {
        b.iter(|| {
            let fit = fit_glm(black_box(&d)).unwrap();
            (anova_table(&fit).unwrap(), model_summary(&fit).unwrap())
        })
    });
    let plan = leave_one_out_plan(d.len()).unwrap();
    let spec = ModelSpec::Forest(ForestParams::new(50, cfg, 2, 0));
    c.bench_function("forest_loocv_50", |b| b.iter(|| cross_validate(black_box(&d), &spec, &plan).unwrap()));
}

criterion_group!(benches, bench);
criterion_main!(benches);

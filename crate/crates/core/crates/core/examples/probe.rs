use weldopt_core::*;
fn main() {
    let d = builtin_aa6262();
    for nu in [0.1, 0.3, 1.0] {
        for depth in [1, 2, 3, 0] {
            let b = fit_gbm(&d, 50, &TreeConfig::with_max_depth(depth), nu, 0.0, 0).unwrap();
            let ps: Vec<f64> = d.runs().iter().map(|r| b.predict(&r.factors).unwrap()).collect();
            let lo = ps.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            println!("nu {nu} depth {depth}: [{lo:.4}, {hi:.4}] final mse {:.3e}", b.train_mse.last().unwrap());
        }
    }
}

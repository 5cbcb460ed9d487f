//! Values printed in the original study of the AA 6262 welds. They are
//! compared against what this tool computes and every mismatch is listed in
//! the report's discrepancy log.

/// Claimed optimum: 1200 rpm, 50 mm/min, 0.3 mm (levels 3, 2, 3).
pub const OPTIMUM_LEVELS: [usize; 3] = [3, 2, 3];
pub const OPTIMUM_SETTINGS: [f64; 3] = [1200.0, 50.0, 0.3];

/// ANOVA rows: source, DF, adjusted SS, adjusted MS, F, p.
pub const ANOVA_ROWS: [(&str, usize, f64, f64, f64, f64); 3] = [
    ("RPM", 2, 232.621, 116.311, 145.62, 0.007),
    ("Feed rate", 2, 2.965, 1.483, 1.86, 0.350),
    ("Plan depth", 2, 133.779, 66.889, 83.75, 0.012),
];
pub const ANOVA_ERROR: (usize, f64, f64) = (2, 1.597, 0.799);
pub const ANOVA_TOTAL: (usize, f64) = (8, 370.963);

/// S, R², adjusted R², predicted R² (percent for the last three).
pub const MODEL_SUMMARY: (f64, f64, f64, f64) = (0.89370, 99.57, 98.28, 91.28);

/// MSE, MAE, R² reported for the random forest and the boosted model.
pub const RF_METRICS: (f64, f64, f64) = (4.42, 1.979, 0.62);
pub const BOOST_METRICS: (f64, f64, f64) = (4.14, 1.99, 0.65);

/// `v` rounded to 6 significant digits.
pub fn round_sig6(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().expect("formatted float parses")
}

/// Shortest decimal rendering of `v` after rounding to 6 significant digits.
pub fn sig6(v: f64) -> String {
    format!("{}", round_sig6(v))
}

//! Text serialization helpers shared by the CSV and DOT writers.

/// Formats a float with 17 significant digits, which round-trips any `f64`
/// exactly. Non-finite values are written as `inf`, `-inf` and `NaN`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

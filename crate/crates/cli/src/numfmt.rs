/// Significant digits used for every number the tool prints.
pub const SIG_DIGITS: usize = 12;

/// Rounds `x` to [`SIG_DIGITS`] significant digits. Non-finite values pass
/// through unchanged.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("scientific notation parses")
}

/// Text form of [`round_sig`] for CSV cells.
pub fn fmt(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".to_string()
    } else {
        r.to_string()
    }
}

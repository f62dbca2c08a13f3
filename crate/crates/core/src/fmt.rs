//! Compact decimal formatting with a fixed number of significant digits,
//! used by the CSV and SVG writers. Output is a pure function of the value
//! bits, so emitted files are byte-stable across runs.

/// Formats `x` with `sig` significant digits, trimming trailing zeros.
/// Falls back to scientific notation outside a comfortable decimal range.
pub fn sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= sig as i32 {
        let s = format!("{:.*e}", sig - 1, x);
        trim_mantissa(&s)
    } else {
        let places = (sig as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.places$}");
        trim_decimal(&s)
    }
}

fn trim_decimal(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn trim_mantissa(s: &str) -> String {
    match s.split_once('e') {
        Some((mant, exp)) => format!("{}e{}", trim_decimal(mant), exp),
        None => s.to_string(),
    }
}

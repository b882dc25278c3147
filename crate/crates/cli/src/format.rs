//! Locale-free number formatting shared by the CSV and summary writers.

/// Significant digits kept in every written float.
pub const SIG_DIGITS: i32 = 6;

/// Fixed-point rendering of `x` with six significant digits, e.g.
/// `4.25 → "4.25000"`, `0.0123 → "0.0123000"`, `1234567 → "1234570"`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return format!("{:.*}", (SIG_DIGITS - 1) as usize, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = SIG_DIGITS - 1 - magnitude;
    if decimals >= 0 {
        let s = format!("{:.*}", decimals as usize, x);
        // rounding can carry into a new digit (9.999995 → 10.00000)
        let digits = s
            .chars()
            .filter(|c| c.is_ascii_digit())
            .skip_while(|c| *c == '0')
            .count();
        if digits > SIG_DIGITS as usize && decimals > 0 {
            return format!("{:.*}", decimals as usize - 1, x);
        }
        s
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (x / scale).round() * scale)
    }
}

/// `x` rounded to six significant digits, for structured output.
pub fn round6(x: f64) -> f64 {
    if x.is_finite() {
        sig6(x).parse().expect("sig6 renders a parseable float")
    } else {
        x
    }
}

//! Fixed-precision number formatting for CSV output.

/// Significant digits in emitted CSV numbers.
pub const SIG_DIGITS: usize = 12;

/// `%.12g`-style rendering: `digits` significant figures, trailing zeros
/// dropped, exponent form outside `1e-5 ≤ |x| < 1e12`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// [`format_sig`] at [`SIG_DIGITS`].
pub fn fmt12(x: f64) -> String {
    format_sig(x, SIG_DIGITS)
}

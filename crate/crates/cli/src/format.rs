//! Nine-significant-digit rendering shared by CSV and JSON outputs.

/// `%.9g`-style rendering: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `x` rounded to nine significant digits, for JSON output.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() {
        sig9(x).parse().expect("sig9 output parses")
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_like_printf_g() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.02), "0.02");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(123456789.4), "123456789");
        assert_eq!(sig9(1234567890.0), "1.23456789e9");
        assert_eq!(sig9(1e-4), "0.0001");
        assert_eq!(sig9(1.74484559e-5), "1.74484559e-5");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(-2.5), "-2.5");
        assert_eq!(sig9(9.9999999999), "10");
    }

    #[test]
    fn round9_keeps_nine_digits() {
        assert_eq!(round9(1.0 / 7.0), 0.142857143);
    }
}

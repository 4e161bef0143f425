/// Formats `x` with `digits` significant digits, `%g` style: fixed notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // Round first so the exponent reflects the printed mantissa (9.99999999995 -> 10).
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
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

#[cfg(test)]
mod tests {
    use super::format_sig;

    #[test]
    fn general_format() {
        assert_eq!(format_sig(0.0, 10), "0");
        assert_eq!(format_sig(1.0, 10), "1");
        assert_eq!(format_sig(0.1234567890123, 10), "0.123456789");
        assert_eq!(format_sig(-2.5, 10), "-2.5");
        assert_eq!(format_sig(123456.789, 10), "123456.789");
        assert_eq!(format_sig(1.0e-7, 10), "1e-7");
        assert_eq!(format_sig(6.993e9, 10), "6993000000");
        assert_eq!(format_sig(1.5e12, 10), "1.5e12");
        assert_eq!(format_sig(9.99999999995, 10), "10");
        assert_eq!(format_sig(f64::INFINITY, 10), "inf");
    }
}

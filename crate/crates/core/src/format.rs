//! Text formatting shared by the exports.

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn sig17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// 17 significant digits, positional for moderate magnitudes
/// (`0.36787944117144233`), scientific otherwise.
pub fn sig17_decimal(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    if (-5..=16).contains(&exponent) {
        let s = format!("{:.*}", (16 - exponent).max(0) as usize, v);
        // rounding can carry into a new leading digit
        let digits = s
            .chars()
            .filter(|c| c.is_ascii_digit())
            .skip_while(|&c| c == '0')
            .count();
        if digits > 17 && s.contains('.') {
            return format!("{:.*}", (15 - exponent).max(0) as usize, v);
        }
        s
    } else {
        sig17(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            assert_eq!(sig17(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(sig17(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn decimal_form() {
        assert_eq!(sig17_decimal((-1.0f64).exp()), "0.36787944117144233");
        assert_eq!(sig17_decimal(0.0), "0");
        for v in [9.999999999999999e-3, 123.456, -2.5e-7, 1e20, 0.1] {
            let s = sig17_decimal(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}

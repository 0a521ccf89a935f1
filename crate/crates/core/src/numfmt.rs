//! Fixed-precision number formatting shared by CSV and report output.

/// Significant digits used for every printed floating-point value.
pub const SIG_DIGITS: usize = 12;

/// `x` with [`SIG_DIGITS`] significant digits, trailing zeros trimmed.
/// Values outside `[1e-5, 1e12)` use scientific notation.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim(mant));
    }
    let (sign, mant) = mant.strip_prefix('-').map_or(("", mant), |m| ("-", m));
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{}", trim(&body))
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn examples() {
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(0.25), "0.25");
        assert_eq!(sig(-0.5), "-0.5");
        assert_eq!(sig(5.0 / 16.0 * (1.0 + std::f64::consts::FRAC_1_SQRT_2)), "0.533470869121");
        assert_eq!(sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig(123456.0), "123456");
        assert_eq!(sig(0.999999999999999), "1");
        assert_eq!(sig(9.9999999999999), "10");
        assert_eq!(sig(1.5e-9), "1.5e-9");
        assert_eq!(sig(std::f64::consts::PI), "3.14159265359");
    }
}

/// Formats a float with at most 9 significant digits, trailing zeros
/// removed, in positional notation for exponents in `-5..9` and scientific
/// otherwise. Equal values always produce identical text.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.8e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };

    if !(-5..9).contains(&exp) {
        let frac = digits[1..].trim_end_matches('0');
        return if frac.is_empty() {
            format!("{sign}{}e{exp}", &digits[..1])
        } else {
            format!("{sign}{}.{frac}e{exp}", &digits[..1])
        };
    }
    if exp >= 0 {
        let split = exp as usize + 1;
        let int = &digits[..split];
        let frac = digits[split..].trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{}", digits.trim_end_matches('0'))
    }
}

/// Rounds to the value `format_float` would write.
pub fn round_float(v: f64) -> f64 {
    if v.is_finite() {
        format_float(v).parse().expect("formatted float parses")
    } else {
        v
    }
}

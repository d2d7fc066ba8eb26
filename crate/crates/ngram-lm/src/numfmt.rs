//! Significant-digit float formatting for reports and model files.

/// Format with at most `digits` significant digits, trimming trailing
/// zeros, switching to scientific notation for very small or very large
/// magnitudes (the classic `%g` presentation).
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // round to the requested number of significant digits first; the
    // exponent may shift when the mantissa rounds up to 10
    let rounded = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = rounded.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("scientific exponent");
    let neg = mantissa.starts_with('-');
    let digit_run: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    let body = if exp < -4 || exp >= digits as i32 {
        let trimmed = digit_run.trim_end_matches('0');
        let trimmed = if trimmed.is_empty() { "0" } else { trimmed };
        if trimmed.len() == 1 {
            format!("{trimmed}e{exp}")
        } else {
            format!("{}.{}e{exp}", &trimmed[..1], &trimmed[1..])
        }
    } else if exp >= 0 {
        let int_len = exp as usize + 1;
        if digit_run.len() <= int_len {
            format!("{digit_run:0<int_len$}")
        } else {
            let frac = digit_run[int_len..].trim_end_matches('0');
            if frac.is_empty() {
                digit_run[..int_len].to_string()
            } else {
                format!("{}.{frac}", &digit_run[..int_len])
            }
        }
    } else {
        let frac = format!("{}{}", "0".repeat((-exp - 1) as usize), digit_run);
        format!("0.{}", frac.trim_end_matches('0'))
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Like [`format_sig`], but escalates to the shortest exactly
/// round-tripping representation whenever the trimmed form would not
/// parse back to the identical value.
pub fn format_sig_exact(x: f64, digits: usize) -> String {
    let s = format_sig(x, digits);
    if s.parse::<f64>() == Ok(x) {
        s
    } else {
        format!("{x}")
    }
}

//! Command-line quantities with unit suffixes.
//!
//! Durations accept `s`, `ms`, `us` (or `μs`) and `ns`; a bare number is in
//! seconds. Angular frequencies accept `MHz`, `kHz` and `Hz`, read as `ω/2π`,
//! or `rad/s`; a bare number is in rad/s.

use std::f64::consts::PI;

fn split(text: &str) -> (&str, &str) {
    let t = text.trim();
    let end = t
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '-'
                || c == '+'
                || ((c == 'e' || c == 'E') && i > 0 && is_exponent(t, i)))
        })
        .map_or(t.len(), |(i, _)| i);
    (&t[..end], t[end..].trim())
}

fn is_exponent(t: &str, i: usize) -> bool {
    t[i + 1..].starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+')
}

fn number(text: &str, value: &str) -> Result<f64, String> {
    let v: f64 = value.parse().map_err(|_| format!("`{text}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

pub fn parse_duration(text: &str) -> Result<f64, String> {
    let (value, unit) = split(text);
    let scale = match unit {
        "" | "s" => 1.0,
        "ms" => 1e-3,
        "us" | "μs" | "µs" => 1e-6,
        "ns" => 1e-9,
        _ => return Err(format!("unknown duration unit in `{text}`")),
    };
    Ok(number(text, value)? * scale)
}

pub fn parse_angular(text: &str) -> Result<f64, String> {
    let (value, unit) = split(text);
    let scale = match unit {
        "" | "rad/s" => 1.0,
        "Hz" => 2.0 * PI,
        "kHz" => 2.0 * PI * 1e3,
        "MHz" => 2.0 * PI * 1e6,
        "GHz" => 2.0 * PI * 1e9,
        _ => return Err(format!("unknown frequency unit in `{text}`")),
    };
    Ok(number(text, value)? * scale)
}

//! Parsing of value lists such as `20,30,40` or `0.01:0.49:0.01`.

use lattice_align::diophantine::Gain;

/// Splits a decimal literal into an integer mantissa and a count of
/// decimal places.
fn decimal_parts(s: &str) -> Option<(i128, u32)> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let m: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    Some((if neg { -m } else { m }, frac.len() as u32))
}

/// Expands `start:stop:step` over decimal literals. Values are generated on
/// the common decimal grid, so `0.49` in a range is the same double as the
/// literal `0.49`.
fn expand_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range '{spec}' must be start:stop:step"));
    }
    let parsed: Vec<(i128, u32)> = parts
        .iter()
        .map(|p| decimal_parts(p).ok_or_else(|| format!("'{p}' is not a decimal number")))
        .collect::<Result<_, _>>()?;
    let places = parsed.iter().map(|p| p.1).max().unwrap_or(0);
    if places > 12 {
        return Err(format!("range '{spec}' has too many decimal places"));
    }
    let scale = |(m, d): (i128, u32)| m * 10i128.pow(places - d);
    let (a, b, s) = (scale(parsed[0]), scale(parsed[1]), scale(parsed[2]));
    if s <= 0 {
        return Err(format!("range '{spec}' needs a positive step"));
    }
    if b < a {
        return Err(format!("range '{spec}' has stop below start"));
    }
    let count = (b - a) / s + 1;
    if count > 1_000_000 {
        return Err(format!("range '{spec}' has too many points"));
    }
    Ok((0..count)
        .map(|i| {
            let m = a + i * s;
            format!("{m}e-{places}").parse().expect("decimal literal")
        })
        .collect())
}

/// Parses a comma-separated list of decimals and ranges.
pub fn parse_reals(spec: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.contains(':') {
            out.extend(expand_range(item)?);
        } else {
            let v: f64 = item
                .parse()
                .map_err(|_| format!("'{item}' is not a number"))?;
            if !v.is_finite() {
                return Err(format!("'{item}' is not finite"));
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Parses a comma-separated list of gains: decimals, `r/q` fractions and
/// decimal ranges.
pub fn parse_gains(spec: &str) -> Result<Vec<Gain>, String> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.contains(':') {
            out.extend(expand_range(item)?.into_iter().map(Gain::Float));
        } else {
            out.push(item.parse::<Gain>().map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

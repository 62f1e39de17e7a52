//! CSV output helpers.

use std::fmt::Write as _;

/// Formats `x` with 9 significant digits, in fixed notation for moderate
/// magnitudes and scientific notation otherwise. Trailing zeros are
/// dropped.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// Accumulates a CSV document with a leading comment line.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(comment: &str, columns: &[&str]) -> Self {
        let mut buf = String::new();
        writeln!(buf, "# {comment}").unwrap();
        writeln!(buf, "{}", columns.join(",")).unwrap();
        Self { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        writeln!(self.buf, "{}", fields.join(",")).unwrap();
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

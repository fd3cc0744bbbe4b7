//! Deterministic JSON and CSV with 17 significant digits.

use serde::Serialize;
use serde_json::{Number, Value};

use crate::error::CliError;

/// Shortest fixed or scientific form carrying 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

fn reformat(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *v = if x.is_finite() {
                Value::Number(serde_json::from_str::<Number>(&fmt17(x)).expect("valid number literal"))
            } else {
                Value::Null
            };
        }
        Value::Array(a) => a.iter_mut().for_each(reformat),
        Value::Object(o) => o.values_mut().for_each(reformat),
        _ => {}
    }
}

pub fn to_json<S: Serialize>(payload: &S) -> Result<String, CliError> {
    let mut v = serde_json::to_value(payload).map_err(|e| CliError::numerical(format!("serialization: {e}")))?;
    reformat(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::numerical(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// A CSV table with string cells.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::numerical(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::numerical(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [std::f64::consts::PI, 2.0 / std::f64::consts::PI, -1e-9, 123456.789, 1e300, 0.1] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt17(1.0), "1.0000000000000000");
        assert_eq!(fmt17(0.0), "0.0");
    }

    #[test]
    fn json_uses_fixed_digits() {
        #[derive(Serialize)]
        struct P {
            x: f64,
            n: usize,
            y: f64,
        }
        let s = to_json(&P { x: 0.5, n: 3, y: f64::INFINITY }).unwrap();
        assert!(s.contains("\"x\": 0.50000000000000000"));
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"y\": null"));
    }
}

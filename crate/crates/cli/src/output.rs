//! Serialization: versioned JSON with floats as 17-digit strings, RFC-4180 CSV.

use lspec_core::C64;
use serde_json::{json, Map, Value};
use std::path::Path;

use crate::CliError;

pub const SCHEMA: &str = "lspec/1";

/// Decimal string with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn complex(z: C64) -> Value {
    json!({ "re": fmt_f64(z.re), "im": fmt_f64(z.im) })
}

pub fn real(x: f64) -> Value {
    Value::String(fmt_f64(x))
}

/// Replaces every floating-point number in `v` by its 17-digit string.
/// Integers stay numbers.
pub fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(fmt_f64(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Adds the schema tag and normalizes floats.
pub fn document(body: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), Value::String(SCHEMA.into()));
    match stringify_floats(body) {
        Value::Object(o) => out.extend(o),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// A table rendered to RFC-4180 CSV with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

fn io<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes all files into `dir`, creating it if needed. Everything is
/// rendered before the first write.
pub fn write_artifacts(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io)?;
    for (name, text) in files {
        std::fs::write(dir.join(name), text).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        // Round trip is exact.
        for x in [std::f64::consts::PI, 1e-300, 6.02214076e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn floats_become_strings() {
        let v = document(json!({ "a": 1.5, "b": [2, 0.25], "c": { "d": 3 } }));
        assert_eq!(v["schema"], "lspec/1");
        assert_eq!(v["a"], "1.5000000000000000e0");
        assert_eq!(v["b"][0], 2);
        assert_eq!(v["b"][1], "2.5000000000000000e-1");
        assert_eq!(v["c"]["d"], 3);
    }

    #[test]
    fn csv_quotes_and_crlf() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec!["a,b".into(), "1".into()]);
        t.push(vec!["say \"hi\"".into(), "2".into()]);
        assert_eq!(t.to_csv().unwrap(), "name,value\r\n\"a,b\",1\r\n\"say \"\"hi\"\"\",2\r\n");
    }
}

//! Deterministic JSON output: object keys sorted, floats in `{:.16e}`
//! scientific notation, non-finite floats as `null`.

use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// A report tree. Object keys are kept sorted by `serde_json::Map`.
pub type Report = Value;

pub fn to_report<T: Serialize>(value: &T) -> Result<Report> {
    serde_json::to_value(value).map_err(|e| Error::Structure(format!("report serialization failed: {e}")))
}

/// Serializes a report with two-space indentation and a trailing newline.
pub fn to_canonical_json(report: &Report) -> String {
    let mut out = String::new();
    write_value(&mut out, report, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                write_float(out, n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, indent + 1);
                write_value(out, item, indent + 1);
            }
            newline(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, indent + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], indent + 1);
            }
            newline(out, indent);
            out.push('}');
        }
    }
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn write_float(out: &mut String, x: f64) {
    if x.is_finite() {
        let _ = write!(out, "{x:.16e}");
    } else {
        out.push_str("null");
    }
}

/// Float leaf that survives the trip through `serde_json::Value`.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// True if any `"verdict"` field in the tree equals `"violated"`.
pub fn contains_violation(v: &Value) -> bool {
    match v {
        Value::Object(map) => map.iter().any(|(k, x)| (k == "verdict" && x == "violated") || contains_violation(x)),
        Value::Array(items) => items.iter().any(contains_violation),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_layout() {
        let v = json!({"b": 1.5, "a": [1, null, "x"], "c": {}});
        let s = to_canonical_json(&v);
        assert_eq!(
            s,
            "{\n  \"a\": [\n    1,\n    null,\n    \"x\"\n  ],\n  \"b\": 1.5000000000000000e0,\n  \"c\": {}\n}\n"
        );
    }

    #[test]
    fn violation_search() {
        assert!(contains_violation(&json!({"x": [{"verdict": "violated"}]})));
        assert!(!contains_violation(&json!({"verdict": "holds", "y": "violated"})));
    }

    #[test]
    fn non_finite_floats_are_null() {
        assert_eq!(float(f64::INFINITY), Value::Null);
    }
}

//! Plain-text rendering of any JSON report.

use serde_json::Value;
use std::fmt::Write;

pub fn text(value: &Value) -> String {
    let mut out = String::new();
    block(&mut out, value, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().filter_map(scalar).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        _ => None,
    }
}

fn block(out: &mut String, value: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                match scalar(v) {
                    Some(s) => writeln!(out, "{pad}{key}: {s}").unwrap(),
                    None => {
                        writeln!(out, "{pad}{key}:").unwrap();
                        block(out, v, depth + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => writeln!(out, "{pad}- {s}").unwrap(),
                    None => {
                        writeln!(out, "{pad}-").unwrap();
                        block(out, item, depth + 1);
                    }
                }
            }
        }
        other => writeln!(out, "{pad}{}", scalar(other).unwrap_or_default()).unwrap(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested() {
        let v = json!({"verdict": "Violated", "cut": {"alpha": [0, 1], "gamma": 0}, "trace": [{"lp": 1}], "case": null});
        let t = text(&v);
        assert!(t.contains("verdict: Violated\n"));
        assert!(t.contains("cut:\n  alpha: [0, 1]\n  gamma: 0\n"));
        assert!(t.contains("trace:\n  -\n    lp: 1\n"));
        assert!(t.contains("case: -\n"));
    }
}

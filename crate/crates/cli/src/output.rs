//! Report rendering: compact JSON or indented `key: value` text.

use serde::Serialize;
use serde_json::{Map, Number, Value};
use sharpkit::{Error, Result};

/// Rounds every float to 12 significant digits. Object keys come out
/// sorted, so equal inputs render identically.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(report: &T) -> Result<Value> {
    serde_json::to_value(report)
        .map(normalize)
        .map_err(|e| Error::InvalidInput(format!("serialization: {e}")))
}

pub fn json_string<T: Serialize>(report: &T) -> Result<String> {
    Ok(to_value(report)?.to_string())
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    if let Value::Object(map) = v {
        for (k, item) in map {
            match item {
                Value::Object(_) => {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render(item, indent + 1, out);
                }
                Value::Array(xs) if xs.iter().all(is_scalar) => {
                    let parts: Vec<String> = xs.iter().map(Value::to_string).collect();
                    out.push_str(&format!("{pad}{k}: [{}]\n", parts.join(", ")));
                }
                Value::Array(xs) => out.push_str(&format!("{pad}{k}: ({} entries, see --json)\n", xs.len())),
                scalar => out.push_str(&format!("{pad}{k}: {scalar}\n")),
            }
        }
    } else {
        out.push_str(&format!("{pad}{v}\n"));
    }
}

pub fn emit<T: Serialize>(report: &T, json: bool) -> Result<()> {
    if json {
        println!("{}", json_string(report)?);
    } else {
        let mut out = String::new();
        render(&to_value(report)?, 0, &mut out);
        print!("{out}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_twelve_digits() {
        assert_eq!(json_string(&(1.0f64 / 3.0)).unwrap(), "0.333333333333");
        assert_eq!(json_string(&0.75f64).unwrap(), "0.75");
        assert_eq!(json_string(&1e-20f64).unwrap(), "1e-20");
    }

    #[test]
    fn keys_are_sorted() {
        let v = serde_json::json!({"b": 1, "a": 2.0});
        assert_eq!(json_string(&v).unwrap(), r#"{"a":2.0,"b":1}"#);
    }

    #[test]
    fn text_skips_nested_matrices() {
        let v = serde_json::json!({"value": 0.5, "m": [[1, 2]], "p": [0.25, 0.75]});
        let mut out = String::new();
        render(&v, 0, &mut out);
        assert_eq!(out, "m: (1 entries, see --json)\np: [0.25, 0.75]\nvalue: 0.5\n");
    }
}

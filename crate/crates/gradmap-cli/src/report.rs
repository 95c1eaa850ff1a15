//! Report assembly and byte-stable rendering.
//!
//! Reports are JSON with insertion-ordered keys, floats printed at 17
//! significant digits, and no timestamps or paths, so identical inputs
//! produce identical bytes.

use crate::repfile::float_str;
use serde_json::{Map, Value};

pub struct Hook {
    pub name: &'static str,
    pub pass: bool,
    pub detail: Value,
}

impl Hook {
    pub fn new(name: &'static str, pass: bool, detail: Value) -> Self {
        Hook { name, pass, detail }
    }
}

/// Assembles the report document; the boolean is the overall hook verdict.
pub fn assemble(
    command: Value,
    digest: Option<&str>,
    arithmetic: Option<&str>,
    tolerances: Value,
    results: Value,
    hooks: Vec<Hook>,
) -> (Value, bool) {
    let all_pass = hooks.iter().all(|h| h.pass);
    let mut doc = Map::new();
    doc.insert("command".into(), command);
    doc.insert(
        "input_digest".into(),
        digest.map_or(Value::Null, |d| Value::String(d.to_string())),
    );
    doc.insert(
        "arithmetic".into(),
        arithmetic.map_or(Value::Null, |a| Value::String(a.to_string())),
    );
    doc.insert("tolerances".into(), tolerances);
    doc.insert("results".into(), results);
    let hook_vals: Vec<Value> = hooks
        .into_iter()
        .map(|h| {
            let mut o = Map::new();
            o.insert("name".into(), Value::String(h.name.to_string()));
            o.insert("pass".into(), Value::Bool(h.pass));
            o.insert("detail".into(), h.detail);
            Value::Object(o)
        })
        .collect();
    doc.insert("hooks".into(), Value::Array(hook_vals));
    (Value::Object(doc), all_pass)
}

// ── value constructors ───────────────────────────────────────────────────

pub fn jf(x: f64) -> Value {
    assert!(x.is_finite(), "reports carry finite numbers only");
    Value::Number(serde_json::Number::from_f64(x).unwrap())
}

pub fn jopt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, jf)
}

pub fn jvec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| jf(x)).collect())
}

pub fn jvec_opt(v: &Option<Vec<f64>>) -> Value {
    v.as_ref().map_or(Value::Null, |v| jvec(v))
}

pub fn jrows(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| jvec(r)).collect())
}

pub fn jint(x: usize) -> Value {
    Value::Number(serde_json::Number::from(x as u64))
}

pub fn jints(v: &[usize]) -> Value {
    Value::Array(v.iter().map(|&x| jint(x)).collect())
}

pub fn jstr(s: &str) -> Value {
    Value::String(s.to_string())
}

pub fn obj(fields: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in fields {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

// ── rendering ────────────────────────────────────────────────────────────

/// Pretty-prints with 2-space indentation; arrays of scalars stay on one
/// line so numeric rows remain readable.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&float_str(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.iter().all(is_scalar) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(item, indent, out);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    pad(indent + 1, out);
                    write_value(item, indent + 1, out);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                pad(indent, out);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, val)) in map.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(val, indent + 1, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// CSV with a header row and 17-significant-digit cells.
pub fn write_csv(path: &std::path::Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), String> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| float_str(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

//! Reports and their canonical JSON rendering.

use serde_json::{Map, Value};

pub const SCHEMA_VERSION: &str = "1";

/// Non-finite floats are carried through `serde_json::Value` as strings with
/// this prefix and rendered as `null` plus a warning.
const NONFINITE: &str = "\u{1}nonfinite:";

/// JSON number for `x`, or a placeholder that renders as `null`.
pub fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(format!("{NONFINITE}{x}")),
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Results(Value),
    Error { kind: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub outcome: Outcome,
    /// Per-phase wall time; only attached on request because it breaks
    /// byte-reproducibility.
    pub timings_ms: Option<Vec<(String, f64)>>,
}

impl Report {
    pub fn to_value(&self) -> (Value, Vec<String>) {
        let mut warnings = Vec::new();
        let mut root = Map::new();
        root.insert("schema_version".into(), SCHEMA_VERSION.into());
        root.insert("command".into(), self.command.clone().into());
        match &self.outcome {
            Outcome::Results(v) => {
                root.insert("results".into(), scrub(v, "results", &mut warnings));
            }
            Outcome::Error { kind, message } => {
                let mut e = Map::new();
                e.insert("kind".into(), kind.clone().into());
                e.insert("message".into(), message.clone().into());
                root.insert("error".into(), Value::Object(e));
            }
        }
        if let Some(t) = &self.timings_ms {
            let phases = t.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
            root.insert("timings_ms".into(), scrub(&Value::Object(phases), "timings_ms", &mut warnings));
        }
        if !warnings.is_empty() {
            root.insert("warnings".into(), warnings.clone().into());
        }
        (Value::Object(root), warnings)
    }
}

fn scrub(v: &Value, path: &str, warnings: &mut Vec<String>) -> Value {
    match v {
        Value::String(s) if s.starts_with(NONFINITE) => {
            warnings.push(format!("{path}: {} rendered as null", &s[NONFINITE.len()..]));
            Value::Null
        }
        Value::Array(items) => Value::Array(
            items
                .iter()
                .enumerate()
                .map(|(i, x)| scrub(x, &format!("{path}[{i}]"), warnings))
                .collect(),
        ),
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, x)| (k.clone(), scrub(x, &format!("{path}.{k}"), warnings)))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// Canonical JSON: sorted keys, numbers with at most 12 significant digits,
/// trailing LF. `pretty` indents by two spaces.
pub fn emit_report(r: &Report, pretty: bool) -> Vec<u8> {
    let mut out = String::new();
    write_value(&r.to_value().0, pretty, 0, &mut out);
    out.push('\n');
    out.into_bytes()
}

/// Number rendering shared by JSON and CSV output.
pub fn format_number(n: &serde_json::Number) -> String {
    if let Some(i) = n.as_i64() {
        return i.to_string();
    }
    if let Some(u) = n.as_u64() {
        return u.to_string();
    }
    format_float(n.as_f64().expect("JSON numbers are finite"))
}

pub fn format_float(x: f64) -> String {
    let r: f64 = format!("{x:.11e}").parse().expect("float formatting round-trips");
    if r == 0.0 {
        "0".into()
    } else if r.fract() == 0.0 && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else if (1e-6..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn write_value(v: &Value, pretty: bool, depth: usize, out: &mut String) {
    let newline = |out: &mut String, depth: usize| {
        if pretty {
            out.push('\n');
            out.push_str(&"  ".repeat(depth));
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&format_number(n)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                write_value(x, pretty, depth + 1, out);
            }
            newline(out, depth);
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
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                if pretty {
                    out.push(' ');
                }
                write_value(&map[k], pretty, depth + 1, out);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}

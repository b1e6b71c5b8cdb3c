//! Deterministic rendering: floats rounded to 12 significant digits, maps in
//! sorted key order.

use serde::Serialize;
use serde_json::Value;

use bcalc::{IndexEntry, IndexSet, Q};

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Text form of a float with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{:.11e}", x)
    } else {
        x.to_string()
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Serialize with rounded floats.
pub fn to_json<T: Serialize>(t: &T) -> Value {
    round_value(serde_json::to_value(t).expect("reports serialize"))
}

pub fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values print")
}

fn entry_row(e: &IndexEntry) -> String {
    format!("  {:<12} {}", e.z.to_string(), e.p)
}

/// Generators followed by the members with `Re z ≤ bound`, one per line.
pub fn index_set_table(s: &IndexSet, bound: Q) -> String {
    let mut out = format!(
        "generators: {s}\nmembers with Re z <= {bound}:\n  {:<12} p\n",
        "z"
    );
    if s.is_empty() {
        out.push_str("  (none)\n");
    }
    for e in s.truncate(bound) {
        out.push_str(&entry_row(&e));
        out.push('\n');
    }
    out
}

/// JSON form of an index set with its truncated member list.
pub fn index_set_json(s: &IndexSet, bound: Q) -> Value {
    serde_json::json!({
        "generators": to_json(s)["generators"],
        "inf_re": s.inf_re().to_string(),
        "truncate": bound.to_string(),
        "members": to_json(&s.truncate(bound)),
    })
}

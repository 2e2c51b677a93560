//! Report serialization: JSON with every float written to 17 significant
//! digits, and a long-format CSV table.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Number, Value};

/// Rewrites every floating-point number in `v` with 17 significant digits.
pub fn normalize_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *n = float_number(x);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(normalize_floats),
        Value::Object(o) => o.values_mut().for_each(normalize_floats),
        _ => {}
    }
}

fn float_number(x: f64) -> Number {
    // Finite by construction: serde_json maps non-finite floats to null.
    format!("{x:.16e}").parse().expect("formatted float is valid JSON")
}

/// Pretty JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, serde_json::Error> {
    let mut v = serde_json::to_value(value)?;
    normalize_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// One `(shape, m, a, quantity, value)` row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LongRow {
    pub shape: String,
    pub m: f64,
    pub a: Option<f64>,
    pub quantity: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LongTable {
    pub rows: Vec<LongRow>,
}

impl LongTable {
    pub fn push(&mut self, shape: &str, m: f64, a: Option<f64>, quantity: &str, value: f64) {
        self.rows.push(LongRow { shape: shape.to_string(), m, a, quantity: quantity.to_string(), value });
    }

    /// Adds every numeric field of a serializable record, using dotted
    /// paths for nested fields. Booleans become 0/1.
    pub fn push_record<T: Serialize>(&mut self, shape: &str, m: f64, a: Option<f64>, record: &T) -> Result<(), serde_json::Error> {
        let v = serde_json::to_value(record)?;
        self.flatten(shape, m, a, "", &v);
        Ok(())
    }

    fn flatten(&mut self, shape: &str, m: f64, a: Option<f64>, prefix: &str, v: &Value) {
        let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Number(n) => {
                if let Some(x) = n.as_f64() {
                    self.push(shape, m, a, prefix, x);
                }
            }
            Value::Bool(b) => self.push(shape, m, a, prefix, if *b { 1.0 } else { 0.0 }),
            Value::Object(o) => {
                for (k, x) in o {
                    self.flatten(shape, m, a, &join(k), x);
                }
            }
            Value::Array(arr) => {
                for (i, x) in arr.iter().enumerate() {
                    self.flatten(shape, m, a, &join(&i.to_string()), x);
                }
            }
            _ => {}
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("shape,m,a,quantity,value\n");
        for r in &self.rows {
            let a = r.a.map(|a| format!("{a:.16e}")).unwrap_or_default();
            let _ = writeln!(s, "{},{:.16e},{},{},{:.16e}", csv_field(&r.shape), r.m, a, csv_field(&r.quantity), r.value);
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct R {
        x: f64,
        n: usize,
        ok: bool,
        inner: Vec<f64>,
    }

    #[test]
    fn floats_have_17_digits() {
        let s = to_json(&R { x: 0.1, n: 3, ok: true, inner: vec![1.0, 2.5e-300] }).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("2.5000000000000000e-300"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn long_table_flattens() {
        let mut t = LongTable::default();
        t.push_record("s", 1.0, Some(0.5), &R { x: 2.0, n: 1, ok: false, inner: vec![3.0] }).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("shape,m,a,quantity,value\n"));
        assert!(csv.contains(",inner.0,"));
        assert_eq!(t.rows.len(), 4);
        let mut q = LongTable::default();
        q.push("a,b", 1.0, None, "v", 1.0);
        assert!(q.to_csv().contains("\"a,b\",1.0000000000000000e0,,v,"));
    }
}

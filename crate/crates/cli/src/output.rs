//! Result tables and their CSV/JSON emitters.
//!
//! CSV carries the metadata as leading `#` comment lines, then a header row,
//! then data (UTF-8, '.' decimal, no locale). JSON mirrors the same content
//! as {"metadata": {...}, "columns": [...], "rows": [[...]]}. Output is
//! deterministic: no timestamps, fixed key order.

use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            metadata: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, values: Vec<Value>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    fn cell_to_csv(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            other => other.to_string(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Self::cell_to_csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: serde_json::Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let doc = json!({
            "metadata": Value::Object(meta),
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

/// JSON number from f64 (NaN/inf become null, which CSV renders empty).
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn int(x: usize) -> Value {
    Value::Number(x.into())
}

pub fn text(s: impl ToString) -> Value {
    Value::String(s.to_string())
}

pub fn boolean(b: bool) -> Value {
    Value::Bool(b)
}

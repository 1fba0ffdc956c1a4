use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

/// Fixed 17-significant-digit rendering, so equal inputs give equal bytes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number with [`fmt_f64`] digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    match serde_json::from_str::<Number>(&fmt_f64(x)) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

/// Rewrites every non-integer number in `v` with [`fmt_f64`].
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map_or(Value::Null, num),
        Value::Array(xs) => Value::Array(xs.into_iter().map(canonical).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: serde::Serialize>(x: &T) -> Value {
    canonical(serde_json::to_value(x).unwrap_or(Value::Null))
}

/// Writes files under one output directory; the only writer in a run.
pub struct Sink {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn put(&mut self, name: &str, text: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json(&mut self, name: &str, v: &Value) -> io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(v).expect("JSON values always serialize");
        text.push('\n');
        self.put(name, &text)
    }

    /// CSV with `# key=value` metadata lines, a header row and full-precision rows.
    pub fn csv(
        &mut self,
        name: &str,
        meta: &[(&str, String)],
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> io::Result<PathBuf> {
        let mut text = String::new();
        for (k, v) in meta {
            text.push_str(&format!("# {k}={v}\n"));
        }
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.put(name, &text)
    }

    /// Raw text, for profiles already rendered by the library.
    pub fn text(&mut self, name: &str, text: &str) -> io::Result<PathBuf> {
        self.put(name, text)
    }
}

/// Verdict object shared by every check.
pub struct Verdict {
    pub check: String,
    pub anchor: &'static str,
    pub formula: String,
    pub predicted: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub outcome: Option<&'static str>,
    pub details: Value,
}

impl Verdict {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("check".into(), Value::String(self.check.clone()));
        m.insert("anchor".into(), Value::String(self.anchor.into()));
        m.insert("formula".into(), Value::String(self.formula.clone()));
        m.insert("predicted".into(), num(self.predicted));
        m.insert("measured".into(), num(self.measured));
        m.insert("tolerance".into(), num(self.tolerance));
        m.insert("pass".into(), Value::Bool(self.pass));
        if let Some(o) = self.outcome {
            m.insert("verdict".into(), Value::String(o.into()));
        }
        m.insert("details".into(), self.details.clone());
        Value::Object(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.6).to_string(), "1.6000000000000001e+0");
        assert_eq!(num(f64::NAN), Value::Null);
    }

    #[test]
    fn canonical_rewrites_nested_floats() {
        let v = serde_json::json!({"a": [0.5, 2], "b": {"c": 0.25}});
        let c = canonical(v);
        assert_eq!(c.to_string(), r#"{"a":[5.0000000000000000e-1,2],"b":{"c":2.5000000000000000e-1}}"#);
    }
}

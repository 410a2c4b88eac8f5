//! Rendering of experiment documents to CSV and JSON, and atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value as Json};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
    List(Vec<u64>),
    Null,
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

impl Value {
    fn csv_cell(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Real(v) => format_real(*v),
            Value::Bool(v) => v.to_string(),
            Value::Text(v) => v.clone(),
            Value::List(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(v) => Json::from(*v),
            Value::Real(v) => serde_json::Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Value::Bool(v) => Json::Bool(*v),
            Value::Text(v) => Json::String(v.clone()),
            Value::List(v) => Json::from(v.clone()),
            Value::Null => Json::Null,
        }
    }
}

/// `%.17g`: 17 significant digits with trailing zeros removed, so every
/// finite double round-trips exactly.
pub fn format_real(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        trim_zeros(format!("{v:.*}", (16 - exp) as usize))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Everything one command emits: echoed configuration, scalar summary and
/// a record table.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub command: &'static str,
    pub config: Vec<(&'static str, Value)>,
    pub summary: Vec<(&'static str, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Printed on stderr, never part of the payload.
    pub warnings: Vec<String>,
}

impl Document {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            config: Vec::new(),
            summary: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn config_value(&self, key: &str) -> Option<&Value> {
        self.config.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn summary_value(&self, key: &str) -> Option<&Value> {
        self.summary.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# wavefactor {} schema_version={SCHEMA_VERSION}\n", self.command);
        for (k, v) in &self.config {
            out.push_str(&format!("# config {k}={}\n", v.csv_cell()));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary {k}={}\n", v.csv_cell()));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory csv write");
        for row in &self.rows {
            w.write_record(row.iter().map(Value::csv_cell)).expect("in-memory csv write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv"));
        out
    }

    fn pairs(items: &[(&'static str, Value)]) -> Json {
        Json::Object(items.iter().map(|(k, v)| (k.to_string(), v.json())).collect())
    }

    pub fn summary_json(&self) -> Json {
        let mut doc = Map::new();
        doc.insert("schema_version".into(), Json::from(SCHEMA_VERSION));
        doc.insert("command".into(), Json::from(self.command));
        doc.insert("config".into(), Self::pairs(&self.config));
        doc.insert("summary".into(), Self::pairs(&self.summary));
        Json::Object(doc)
    }

    pub fn to_json(&self) -> String {
        let mut doc = self.summary_json();
        let records: Vec<Json> = self
            .rows
            .iter()
            .map(|row| Json::Object(self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect()))
            .collect();
        doc.as_object_mut().expect("object").insert("records".into(), Json::Array(records));
        let mut s = serde_json::to_string_pretty(&doc).expect("json serialisation");
        s.push('\n');
        s
    }
}

/// Path of the summary sidecar written next to a CSV output file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".summary.json");
    out.with_file_name(name)
}

/// Writes every `(path, contents)` pair through a temporary file in the
/// target directory; nothing is renamed into place unless all writes
/// succeeded.
pub fn write_atomic(files: &[(PathBuf, String)]) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, contents) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)
            .map_err(|e| CliError::io(format!("cannot create temporary file in {}: {e}", dir.display())))?;
        tmp.write_all(contents.as_bytes())
            .and_then(|_| tmp.flush())
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path)
            .map_err(|e| CliError::io(format!("cannot move output into {}: {e}", path.display())))?;
    }
    Ok(())
}

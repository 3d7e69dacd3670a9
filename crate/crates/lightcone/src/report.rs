//! Byte-deterministic CSV/JSON emitters.
//!
//! Every artifact embeds the tool version and the resolved run
//! configuration: CSV as leading `#` comment lines before the header, JSON
//! as top-level `version`/`config` keys next to the record array. Floats
//! use shortest round-trip formatting with `.` as the decimal separator
//! and `\n` line endings, so identical inputs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::LightConeRecord;
use crate::error::{Error, Result};

/// One CSV/JSON cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Str(String),
    Int(u64),
    Float(f64),
    /// `None` renders as an empty CSV cell / JSON `null` (censored data).
    OptFloat(Option<f64>),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Str(s) => s.clone(),
            Field::Int(v) => v.to_string(),
            Field::Float(v) => fmt_float(*v),
            Field::OptFloat(Some(v)) => fmt_float(*v),
            Field::OptFloat(None) => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Field::Str(s) => serde_json::Value::String(s.clone()),
            Field::Int(v) => serde_json::json!(v),
            Field::Float(v) => float_json(*v),
            Field::OptFloat(Some(v)) => float_json(*v),
            Field::OptFloat(None) => serde_json::Value::Null,
        }
    }
}

/// Shortest round-trip decimal; infinities spelled out so CSV consumers
/// see a stable token.
fn fmt_float(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v}")
}

fn float_json(v: f64) -> serde_json::Value {
    // JSON has no infinity literal; keep the same token as CSV.
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::Value::String(fmt_float(v))
    }
}

/// Homogeneous record table: fixed header, rows checked for arity.
#[derive(Clone, Debug)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Field>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(Error::argument(format!(
                "row has {} fields, header has {}",
                row.len(),
                self.headers.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Run metadata embedded in every artifact.
#[derive(Clone, Debug)]
pub struct RunMeta {
    pub version: String,
    /// Resolved configuration as a JSON value (insertion-ordered keys).
    pub config: serde_json::Value,
}

impl RunMeta {
    pub fn new(config: serde_json::Value) -> Self {
        RunMeta { version: crate::VERSION.to_string(), config }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::argument(format!("unknown format '{other}'"))),
        }
    }
}

pub fn render(table: &Table, format: Format, meta: &RunMeta) -> String {
    match format {
        Format::Csv => render_csv(table, meta),
        Format::Json => render_json(table, meta),
    }
}

fn render_csv(table: &Table, meta: &RunMeta) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", meta.version);
    let _ = writeln!(out, "# config: {}", meta.config);
    let _ = writeln!(out, "{}", table.headers.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Field::csv).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn render_json(table: &Table, meta: &RunMeta) -> String {
    let records: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            for (h, f) in table.headers.iter().zip(row) {
                obj.insert(h.clone(), f.json());
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    let mut top = serde_json::Map::new();
    top.insert("version".into(), serde_json::json!(meta.version));
    top.insert("config".into(), meta.config.clone());
    top.insert("records".into(), serde_json::Value::Array(records));
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(top))
        .expect("JSON serialization of finite values cannot fail");
    s.push('\n');
    s
}

/// Render an arbitrary JSON document (non-tabular reports) with metadata
/// embedded at the top level.
pub fn render_json_document(body: serde_json::Value, meta: &RunMeta) -> String {
    let mut top = serde_json::Map::new();
    top.insert("version".into(), serde_json::json!(meta.version));
    top.insert("config".into(), meta.config.clone());
    if let serde_json::Value::Object(m) = body {
        for (k, v) in m {
            top.insert(k, v);
        }
    } else {
        top.insert("result".into(), body);
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(top))
        .expect("JSON serialization of finite values cannot fail");
    s.push('\n');
    s
}

/// Write to `path`, or stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(Error::from),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(Error::from)
        }
    }
}

/// Table for `model,alpha,n,r,delta,ts_empirical,ts_bound` rows.
pub fn lightcone_table(records: &[LightConeRecord]) -> Table {
    let mut t = Table::new(&[
        "model",
        "alpha",
        "n",
        "r",
        "delta",
        "ts_empirical",
        "ts_bound",
    ]);
    for rec in records {
        t.push_row(vec![
            Field::Str(rec.model.clone()),
            Field::Float(rec.alpha),
            Field::Int(rec.n as u64),
            Field::Int(rec.r),
            Field::Float(rec.delta),
            Field::OptFloat(rec.ts_empirical),
            Field::Float(rec.ts_bound),
        ])
        .expect("fixed-arity row");
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_meta() -> RunMeta {
        RunMeta {
            version: "lightcone test".into(),
            config: serde_json::json!({"alpha": 3.0, "h": 1.0}),
        }
    }

    fn sample_table() -> Table {
        let mut t = Table::new(&["name", "r", "value", "maybe"]);
        t.push_row(vec![
            Field::Str("a".into()),
            Field::Int(4),
            Field::Float(0.5),
            Field::OptFloat(None),
        ])
        .unwrap();
        t.push_row(vec![
            Field::Str("b".into()),
            Field::Int(8),
            Field::Float(f64::INFINITY),
            Field::OptFloat(Some(1.25)),
        ])
        .unwrap();
        t
    }

    #[test]
    fn csv_layout_and_determinism() {
        let t = sample_table();
        let meta = sample_meta();
        let a = render(&t, Format::Csv, &meta);
        let b = render(&t, Format::Csv, &meta);
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], "# lightcone test");
        assert!(lines[1].starts_with("# config: "));
        assert_eq!(lines[2], "name,r,value,maybe");
        assert_eq!(lines[3], "a,4,0.5,");
        assert_eq!(lines[4], "b,8,inf,1.25");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["x", "y"]);
        let out = render(&t, Format::Csv, &sample_meta());
        assert_eq!(out.lines().count(), 3);
        assert!(out.ends_with("x,y\n"));
    }

    #[test]
    fn json_records_use_header_keys() {
        let out = render(&sample_table(), Format::Json, &sample_meta());
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["version"], "lightcone test");
        assert_eq!(v["config"]["alpha"], 3.0);
        let recs = v["records"].as_array().unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0]["name"], "a");
        assert_eq!(recs[0]["maybe"], serde_json::Value::Null);
        assert_eq!(recs[1]["value"], "inf");
    }

    #[test]
    fn arity_mismatch_rejected() {
        let mut t = Table::new(&["x", "y"]);
        assert!(t.push_row(vec![Field::Int(1)]).is_err());
    }
}

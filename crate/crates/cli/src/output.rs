//! Tabular output as CSV (12 significant digits) or JSON (full doubles).

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Usage(format!("format must be csv or json, got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Computed quantity; `None` is written empty (CSV) or null (JSON).
    Value(Option<f64>),
    /// Input coordinate, written in shortest round-trip form.
    Coord(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Value(None) => String::new(),
            Cell::Value(Some(v)) if v.is_finite() => format!("{:.11e}", v + 0.0),
            Cell::Value(Some(v)) => v.to_string(),
            Cell::Coord(v) => (v + 0.0).to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Value(v) => v.filter(|x| x.is_finite()).map_or(Value::Null, |x| json!(x + 0.0)),
            Cell::Coord(v) => json!(v + 0.0),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Map<String, Value>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            metadata: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| CliError::Io(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        Value::Object(
                            self.columns
                                .iter()
                                .zip(row)
                                .map(|(c, v)| (c.to_string(), v.json()))
                                .collect(),
                        )
                    })
                    .collect();
                let doc = json!({ "metadata": self.metadata, "rows": rows });
                let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }

    /// Writes to `out`, or stdout when absent.
    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let bytes = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, bytes)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout()
                .lock()
                .write_all(&bytes)
                .map_err(|e| CliError::Io(e.to_string())),
        }
    }
}

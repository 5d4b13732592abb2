//! Tables written as CSV (17 significant digits) or JSON lines.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map_or_else(|| Value::String(format_number(*x)), Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Written as a `# {...}` comment line before the CSV header, or as a
    /// leading `{"meta": {...}}` record in JSON lines.
    pub meta: Option<Map<String, Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            meta: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes `<dir>/<stem>.csv` or `<dir>/<stem>.jsonl` and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<PathBuf> {
        let path = match format {
            Format::Csv => dir.join(format!("{stem}.csv")),
            Format::Json => dir.join(format!("{stem}.jsonl")),
        };
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let mut out = BufWriter::new(File::create(&path).map_err(io)?);
        match format {
            Format::Csv => {
                if let Some(meta) = &self.meta {
                    writeln!(out, "# {}", serde_json::to_string(meta)?).map_err(io)?;
                }
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
                w.flush().map_err(io)?;
            }
            Format::Json => {
                if let Some(meta) = &self.meta {
                    let mut rec = Map::new();
                    rec.insert("meta".into(), Value::Object(meta.clone()));
                    writeln!(out, "{}", Value::Object(rec)).map_err(io)?;
                }
                for row in &self.rows {
                    let rec: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect();
                    writeln!(out, "{}", Value::Object(rec)).map_err(io)?;
                }
                out.flush().map_err(io)?;
            }
        }
        Ok(path)
    }
}

//! In-memory artifacts, rendered deterministically and written all-or-nothing.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Shortest round-trip decimal form.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> (String, String) {
        match format {
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for row in &self.rows {
                    s.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                (format!("{}.csv", self.name), s)
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("serialisable");
                s.push('\n');
                (format!("{}.json", self.name), s)
            }
        }
    }
}

/// Everything a command produces.
#[derive(Debug)]
pub struct Artifacts {
    pub summary: Value,
    pub tables: Vec<Table>,
}

/// Write every artifact under `dir`; on any failure remove what was written.
pub fn write_all(dir: &Path, artifacts: &Artifacts, format: Format) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<(String, String)> = artifacts.tables.iter().map(|t| t.render(format)).collect();
    let mut summary = serde_json::to_string_pretty(&artifacts.summary).expect("serialisable");
    summary.push('\n');
    files.push(("summary.json".into(), summary));

    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(source) = fs::write(&path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(CliError::Io { path, source });
        }
        written.push(path);
    }
    Ok(written)
}

//! Byte-stable tables: every float is written with 12 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Float(x) if x.is_nan() => "nan".into(),
            Cell::Float(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Float(x) => format!("{x:.11e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Full config echo plus command-specific results.
#[derive(Debug, Serialize)]
pub struct Sidecar<'a, R: Serialize> {
    pub config: &'a RunConfig,
    pub results: R,
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `<prefix>.csv` and `<prefix>.json`; returns both paths.
pub fn write_outputs<R: Serialize>(
    prefix: &Path,
    table: &Table,
    config: &RunConfig,
    results: R,
) -> Result<(PathBuf, PathBuf), CliError> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let csv_path = with_extension(prefix, "csv");
    let json_path = with_extension(prefix, "json");
    let sidecar = serde_json::to_string_pretty(&Sidecar { config, results })
        .map_err(|e| CliError::Config(format!("cannot serialize results: {e}")))?;
    fs::write(&csv_path, table.to_csv()).map_err(|e| CliError::io(&csv_path, e))?;
    fs::write(&json_path, sidecar + "\n").map_err(|e| CliError::io(&json_path, e))?;
    Ok((csv_path, json_path))
}

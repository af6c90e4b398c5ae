//! Result tables and their CSV/JSON encodings.
//!
//! CSV output starts with one `# key = value` line per metadata entry,
//! followed by a header row. Missing values are written as `NA` in CSV and
//! `null` in JSON. Numbers use the shortest representation that parses back
//! to the same `f64`, so a written table reads back unchanged.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
    Missing,
}

impl Cell {
    /// Non-finite numbers other than ±inf become [`Cell::Missing`].
    pub fn number(v: f64) -> Self {
        if v.is_nan() {
            Self::Missing
        } else {
            Self::Number(v)
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Number(v) => Some(*v),
            _ => None,
        }
    }

    fn to_csv_field(&self) -> String {
        match self {
            Self::Number(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Missing => "NA".to_string(),
        }
    }

    fn from_csv_field(field: &str) -> Self {
        if field == "NA" {
            return Self::Missing;
        }
        match field.parse::<f64>() {
            Ok(v) if !v.is_nan() => Self::Number(v),
            _ => Self::Text(field.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Self::Number(v) if v.is_finite() => json!(v),
            Self::Number(v) => json!(v.to_string()),
            Self::Text(s) => json!(s),
            Self::Missing => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: BTreeMap<String, String>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Format(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.insert(key.into(), value.to_string());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, column: &str) -> Option<&Cell> {
        self.rows.get(row)?.get(self.column_index(column)?)
    }

    /// Numeric values of one column; missing and text cells are skipped.
    pub fn numbers(&self, column: &str) -> Vec<f64> {
        match self.column_index(column) {
            Some(i) => self.rows.iter().filter_map(|r| r[i].as_f64()).collect(),
            None => Vec::new(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| CliError::io("<csv>", e);
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {}", v.replace('\n', "; ")).map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field))
                .map_err(csv_error)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut metadata = BTreeMap::new();
        let mut body = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            if reader
                .read_line(&mut line)
                .map_err(|e| CliError::io("<csv>", e))?
                == 0
            {
                break;
            }
            match line.strip_prefix('#') {
                Some(meta) => {
                    let (k, v) = meta.split_once(" = ").ok_or_else(|| {
                        CliError::Format(format!("metadata line `{}`", line.trim_end()))
                    })?;
                    metadata.insert(
                        k.trim().to_string(),
                        v.trim_end_matches(['\r', '\n']).to_string(),
                    );
                }
                None => {
                    body.push_str(&line);
                    reader
                        .read_to_string(&mut body)
                        .map_err(|e| CliError::io("<csv>", e))?;
                    break;
                }
            }
        }
        let mut table = Self {
            metadata,
            ..Self::default()
        };
        if body.trim().is_empty() {
            return Ok(table);
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        table.columns = r
            .headers()
            .map_err(csv_error)?
            .iter()
            .map(String::from)
            .collect();
        for record in r.records() {
            let record = record.map_err(csv_error)?;
            table.push_row(record.iter().map(Cell::from_csv_field).collect())?;
        }
        Ok(table)
    }

    pub fn to_json(&self) -> Value {
        let metadata: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        json!({ "metadata": metadata, "columns": self.columns, "rows": rows })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())
            .map_err(|e| CliError::Format(e.to_string()))?;
        writeln!(out).map_err(|e| CliError::io("<json>", e))
    }

    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Format(e.to_string())
}

/// Writes `table` to `path`, or to stdout when `path` is `None`.
pub fn write_output(table: &ResultTable, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut out = BufWriter::new(file);
            table.write(format, &mut out)?;
            out.flush().map_err(|e| CliError::io(p, e))
        }
        None => table.write(format, std::io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(["x", "label", "y"]);
        t.set_meta("seed", 3);
        t.set_meta("note", "a = b");
        t.push_row(vec![
            Cell::Number(0.1),
            Cell::Text("ok".into()),
            Cell::Missing,
        ])
        .unwrap();
        t.push_row(vec![
            Cell::Number(f64::INFINITY),
            Cell::Text("x, y".into()),
            Cell::Number(-1e-300),
        ])
        .unwrap();
        t
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(ResultTable::read_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn rows_must_fill_every_column() {
        let mut t = ResultTable::new(["a", "b"]);
        assert!(t.push_row(vec![Cell::Missing]).is_err());
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ResultTable::new(["a", "b"]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n");
    }

    #[test]
    fn json_shape() {
        let v = sample().to_json();
        assert_eq!(v["columns"].as_array().unwrap().len(), 3);
        assert!(v["rows"][0][2].is_null());
        assert_eq!(v["rows"][1][0], json!("inf"));
        assert_eq!(v["metadata"]["seed"], json!("3"));
    }
}

//! Column-oriented CSV files of floating-point series.
//!
//! Values are written with Rust's shortest round-trip representation, so a
//! write followed by a read reproduces every `f64` bit for bit (NaN is
//! written as `NaN`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{HetsisError, Result};

fn csv_error(path: &Path, err: csv::Error) -> HetsisError {
    match err.into_kind() {
        csv::ErrorKind::Io(source) => HetsisError::io(path, source),
        other => HetsisError::Config(format!("{}: malformed csv: {other:?}", path.display())),
    }
}

/// Writes `header` followed by one row per index of the equally long
/// `columns`. LF line endings, no quoting of numeric fields.
pub fn emit_csv(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    if header.len() != columns.len() {
        return Err(HetsisError::invalid(format!(
            "{} header names for {} columns",
            header.len(),
            columns.len()
        )));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return Err(HetsisError::invalid("csv columns differ in length"));
    }
    let file = File::create(path).map_err(|e| HetsisError::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    writer.write_record(header).map_err(|e| csv_error(path, e))?;
    let mut record = Vec::with_capacity(columns.len());
    for k in 0..rows {
        record.clear();
        record.extend(columns.iter().map(|c| format!("{:?}", c[k])));
        writer.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    let mut inner = writer
        .into_inner()
        .map_err(|e| HetsisError::io(path, e.into_error()))?;
    inner.flush().map_err(|e| HetsisError::io(path, e))
}

/// A CSV file read back as named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|k| self.columns[k].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        for (k, field) in record.iter().enumerate() {
            let value = field.trim().parse::<f64>().map_err(|_| {
                HetsisError::Config(format!(
                    "{}: row {} column {}: not a number: {field:?}",
                    path.display(),
                    line + 2,
                    k + 1
                ))
            })?;
            columns[k].push(value);
        }
    }
    Ok(CsvTable { header, columns })
}

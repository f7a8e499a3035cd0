//! Small CSV/JSON helpers shared by the modules and the CLI.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

fn data_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Data {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn read_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// A serde_json error with its position when it has one.
pub fn json_error_message(e: &serde_json::Error) -> String {
    if e.line() == 0 {
        e.to_string()
    } else {
        format!("line {}, column {}: {e}", e.line(), e.column())
    }
}

/// Reads one real per line. Blank lines are skipped; a non-numeric first
/// line is treated as a header.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| read_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(x) if x.is_finite() => out.push(x),
            Ok(x) => return Err(data_err(path, format!("row {}: non-finite value {x}", i + 1))),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(data_err(path, format!("row {}: cannot parse {line:?}", i + 1))),
        }
    }
    Ok(out)
}

/// Time-series CSV: one column (value) or two (time, value); the last
/// column is returned. Missing and non-finite entries are errors carrying
/// the 1-based row number in the file.
pub fn read_series(path: &Path, has_header: bool) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| read_err(path, e))?;
    // the reader skips empty lines, so map records back to file lines here;
    // an empty line before the last value is a missing value
    let filled: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, _)| i + 1)
        .collect();
    if let Some(w) = filled.windows(2).find(|w| w[1] > w[0] + 1) {
        return Err(data_err(path, format!("row {}: missing value", w[0] + 1)));
    }
    let data_lines = &filled[usize::from(has_header).min(filled.len())..];
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut width = None;
    for (i, rec) in rdr.records().enumerate() {
        let row = data_lines.get(i).copied().unwrap_or(i + 1);
        let rec = rec.map_err(|e| data_err(path, format!("row {row}: {e}")))?;
        let w = *width.get_or_insert(rec.len());
        if !(1..=2).contains(&w) {
            return Err(data_err(path, format!("expected 1 or 2 columns, found {w}")));
        }
        let field = rec.get(w - 1).unwrap_or("");
        if field.is_empty() {
            return Err(data_err(path, format!("row {row}: missing value")));
        }
        let x: f64 = field
            .parse()
            .map_err(|_| data_err(path, format!("row {row}: cannot parse {field:?}")))?;
        if !x.is_finite() {
            return Err(data_err(path, format!("row {row}: non-finite value {field}")));
        }
        out.push(x);
    }
    Ok(out)
}

pub fn write_values(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for x in values {
        writeln!(w, "{x}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes a header row followed by numeric rows.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

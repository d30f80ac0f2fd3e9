//! CSV and JSON file handling.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fairglasso::SymMatrix;
use serde::Serialize;

use crate::CliError;

/// Reads a rectangular CSV of numbers. Rows and columns in messages are 1-based
/// and count the header line when there is one.
pub fn read_numeric_csv(path: &Path, header: bool) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if rec.len() != first.len() {
                return Err(CliError::Input(format!(
                    "{}: row {line} has {} columns, expected {}",
                    path.display(),
                    rec.len(),
                    first.len()
                )));
            }
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    CliError::Input(format!(
                        "{}: row {line}, column {}: '{cell}' is not a number",
                        path.display(),
                        c + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

/// Reads a square symmetric matrix.
pub fn read_sym_matrix(path: &Path, header: bool) -> Result<SymMatrix, CliError> {
    let rows = read_numeric_csv(path, header)?;
    SymMatrix::from_rows(&rows).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// One label per non-empty line.
pub fn read_labels(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Writes the file through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Dense matrix with shortest round-trip decimals.
pub fn matrix_csv(m: &SymMatrix) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Serializes rows with the csv crate under a fixed header.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Output(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// `<prefix>.<suffix>`, appended to the file name rather than replacing an extension.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

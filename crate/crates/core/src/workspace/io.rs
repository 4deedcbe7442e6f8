use std::fs;
use std::path::Path;

use crate::features::FeatureMatrix;
use crate::{Error, Result};

use super::Item;

fn parse_err(path: &Path, detail: impl ToString) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

/// Manifest: a JSON array of `{id, thumb, label?}`.
pub fn read_manifest(path: &Path) -> Result<Vec<Item>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

pub fn write_manifest(path: &Path, items: &[Item]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(items)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Headered CSV, one row per manifest item, in manifest order.
pub fn read_features_csv(path: &Path, expected_rows: usize) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, e))?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().all(|n| n.is_empty()) {
        return Err(parse_err(path, "missing header row"));
    }
    let mut columns = vec![Vec::with_capacity(expected_rows); names.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e))?;
        if record.len() != names.len() {
            return Err(parse_err(
                path,
                format!("row {row} has {} fields, expected {}", record.len(), names.len()),
            ));
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, format!("row {row}, column {col}: `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            columns[col].push(v);
        }
    }
    let rows = columns[0].len();
    if rows != expected_rows {
        return Err(Error::RowCountMismatch {
            expected: expected_rows,
            got: rows,
        });
    }
    FeatureMatrix::innate(rows, names, columns)
}

/// Writes values with round-trip precision.
pub fn write_features_csv(path: &Path, matrix: &FeatureMatrix) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(matrix.names())?;
    let mut record = Vec::with_capacity(matrix.cols());
    for i in 0..matrix.rows() {
        record.clear();
        record.extend((0..matrix.cols()).map(|j| format!("{:?}", matrix.column(j)[i])));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

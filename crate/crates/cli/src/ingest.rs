//! Data ingestion: a CSV file with one numeric column and an optional
//! header line. Diagnostics name the offending row.

use std::path::Path;

use crate::errors::CliError;

pub fn read_data_column(path: &Path) -> Result<Vec<f64>, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Ingest(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    let mut saw_content = false;
    for (idx, line) in raw.lines().enumerate() {
        let row = idx + 1;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        if field.contains(',') || field.split_whitespace().count() > 1 {
            return Err(CliError::Ingest(format!(
                "{} line {row}: expected a single numeric column, got {field:?}",
                path.display()
            )));
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_nan() => {
                return Err(CliError::Ingest(format!(
                    "{} line {row}: NaN is not a valid observation",
                    path.display()
                )));
            }
            Ok(v) if !v.is_finite() => {
                return Err(CliError::Ingest(format!(
                    "{} line {row}: non-finite value {v}",
                    path.display()
                )));
            }
            Ok(v) if v < 0.0 => {
                return Err(CliError::Ingest(format!(
                    "{} line {row}: negative value {v}; the data must be nonnegative",
                    path.display()
                )));
            }
            Ok(v) => {
                saw_content = true;
                values.push(v);
            }
            Err(_) => {
                // A non-numeric first content line is a header.
                if !saw_content && values.is_empty() {
                    saw_content = true;
                    continue;
                }
                return Err(CliError::Ingest(format!(
                    "{} line {row}: cannot parse {field:?} as a number",
                    path.display()
                )));
            }
        }
    }
    if values.is_empty() {
        return Err(CliError::Ingest(format!(
            "{}: no observations found",
            path.display()
        )));
    }
    Ok(values)
}

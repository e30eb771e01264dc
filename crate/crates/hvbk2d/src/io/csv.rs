//! Diagnostics CSV output: fixed column schema, full double precision.

use std::io::Write;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::real::Real;

/// Render records to CSV text: a header row, then one row per record with
/// 17 significant digits per value.
pub fn format_diagnostics_csv<T: Real>(records: &[DiagnosticsRecord<T>]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::invalid("records", "nothing to write"));
    }
    let mut out = String::new();
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for rec in records {
        let row: Vec<String> = rec
            .csv_values()
            .iter()
            .map(|v| format!("{:.16e}", v.as_f64()))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Write the diagnostics CSV atomically (temp file + rename).
pub fn write_diagnostics_csv<T: Real>(
    records: &[DiagnosticsRecord<T>],
    path: impl AsRef<Path>,
) -> Result<()> {
    let text = format_diagnostics_csv(records)?;
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension("tmp-write");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(text.as_bytes())?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Read a diagnostics CSV back as raw rows (header validated).
pub fn read_diagnostics_csv(path: impl AsRef<Path>) -> Result<Vec<[f64; 20]>> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("csv", "empty file"))?;
    if header != CSV_COLUMNS.join(",") {
        return Err(Error::invalid("csv", "unexpected header"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut row = [0.0; 20];
        let mut count = 0;
        for (j, cell) in line.split(',').enumerate() {
            if j >= 20 {
                return Err(Error::invalid("csv", format!("row {i}: too many columns")));
            }
            row[j] = cell.parse::<f64>().map_err(|e| {
                Error::invalid("csv", format!("row {i}, column {j}: {e}"))
            })?;
            count = j + 1;
        }
        if count != 20 {
            return Err(Error::invalid(
                "csv",
                format!("row {i}: expected 20 columns, got {count}"),
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

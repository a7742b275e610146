//! Report and diagnostics emission: JSON plus a flat CSV, with numeric
//! fields written in shortest round-trip form.

use std::path::Path;

use pstokes::verify::CheckReport;
use pstokes::{Error, Result};

/// Write check reports as `reports.json` and `reports.csv`. Empty input is a
/// precondition violation.
pub fn emit_reports(reports: &[CheckReport], dir: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Parameter(
            "refusing to emit an empty report set".into(),
        ));
    }
    let json = serde_json::to_string_pretty(reports)?;
    write(dir.join("reports.json"), json)?;
    let mut csv = String::from(CheckReport::CSV_HEADER);
    csv.push('\n');
    for r in reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write(dir.join("reports.csv"), csv)
}

/// Serialize any value as pretty JSON at `path`.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path.to_path_buf(), serde_json::to_string_pretty(value)?)
}

fn write(path: std::path::PathBuf, text: String) -> Result<()> {
    std::fs::write(&path, text.as_bytes()).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Flat `key,value` CSV for scalar diagnostics, deterministic order.
pub fn diagnostics_csv(pairs: &[(String, f64)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        out.push_str(&format!("{k},{v:e}\n"));
    }
    out
}

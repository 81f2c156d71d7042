use std::fs;
use std::path::{Path, PathBuf};

use super::ExperimentResult;
use crate::error::{Error, Result};

/// Per-n rows as CSV with a header line.
pub fn csv_string(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in result.rows() {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(e.error().to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Creates `out_dir/run-<UTC timestamp>` (with a numeric suffix if taken)
/// holding `config.json`, `results.csv` and `summary.json`. Returns the new
/// directory.
pub fn write_run(result: &ExperimentResult, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let base = format!("run-{stamp}");
    let mut dir = out_dir.join(&base);
    let mut k = 1;
    loop {
        match fs::create_dir(&dir) {
            Ok(()) => break,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                dir = out_dir.join(format!("{base}-{k}"));
                k += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    fs::write(dir.join("config.json"), result.config.to_json_string())?;
    fs::write(dir.join("results.csv"), csv_string(result)?)?;
    let summary = serde_json::to_string_pretty(result).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join("summary.json"), summary)?;
    Ok(dir)
}

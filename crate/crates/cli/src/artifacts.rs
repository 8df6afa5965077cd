//! Artifact emission: RFC-4180 CSV timeseries, deterministic summary
//! JSON, and a manifest with content hashes. Also the `plotdata`
//! reshaper, which turns any manifest's timeseries into long-format CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// One rectangular timeseries: a named x-axis column followed by value
/// columns, all f64.
pub struct Timeseries {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Timeseries {
    pub fn new(header: &[&str]) -> Self {
        Timeseries { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_timeseries(path: &Path, ts: &Timeseries) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    w.write_record(&ts.header).map_err(|e| CliError::runtime(e.to_string()))?;
    for row in &ts.rows {
        let rec: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        w.write_record(&rec).map_err(|e| CliError::runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::runtime(e.to_string()))?;
    Ok(())
}

/// Serialized with sorted keys (serde_json maps are BTree-backed) and a
/// trailing newline; no timestamps, so identical inputs give identical
/// bytes.
pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    fs::write(path, text + "\n")
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn sha256_hex(path: &Path) -> Result<(String, u64), CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok((format!("{:x}", hasher.finalize()), bytes.len() as u64))
}

/// Write `manifest.json` listing every named artifact with its sha256.
/// `partial` marks runs that aborted (for example on blowup) after some
/// artifacts were already written.
pub fn write_manifest(
    dir: &Path,
    scenario: &str,
    artifact_names: &[&str],
    partial: bool,
) -> Result<PathBuf, CliError> {
    let mut artifacts = Vec::new();
    for name in artifact_names {
        let path = dir.join(name);
        let (sha, bytes) = sha256_hex(&path)?;
        artifacts.push(serde_json::json!({
            "path": name,
            "sha256": sha,
            "bytes": bytes,
        }));
    }
    let manifest = serde_json::json!({
        "scenario": scenario,
        "partial": partial,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "artifacts": artifacts,
    });
    let path = dir.join("manifest.json");
    write_json(&path, &manifest)?;
    Ok(path)
}

/// Reshape every CSV artifact of a manifest into long-format
/// `series,t,value` rows on `out`. An empty manifest yields just the
/// header.
pub fn emit_plot_data(manifest_path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| CliError::validation(format!("{}: {e}", manifest_path.display())))?;
    let manifest: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("invalid manifest: {e}")))?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    writeln!(out, "series,t,value").map_err(|e| CliError::runtime(e.to_string()))?;
    let artifacts = manifest
        .get("artifacts")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::validation("manifest has no artifacts array"))?;
    for artifact in artifacts {
        let rel = artifact
            .get("path")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::validation("artifact entry has no path"))?;
        if !rel.ends_with(".csv") {
            continue;
        }
        let mut reader = csv::Reader::from_path(dir.join(rel))
            .map_err(|e| CliError::runtime(format!("{rel}: {e}")))?;
        let header = reader
            .headers()
            .map_err(|e| CliError::runtime(e.to_string()))?
            .clone();
        for record in reader.records() {
            let record = record.map_err(|e| CliError::runtime(e.to_string()))?;
            let t = record.get(0).unwrap_or("");
            for col in 1..record.len() {
                let series = header.get(col).unwrap_or("");
                writeln!(out, "{series},{t},{}", record.get(col).unwrap_or(""))
                    .map_err(|e| CliError::runtime(e.to_string()))?;
            }
        }
    }
    Ok(())
}

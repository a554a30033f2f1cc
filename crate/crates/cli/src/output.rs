//! CSV tables and JSON manifests written by every subcommand.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::Config;

/// Version of the CSV column layouts and of the manifest schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one subcommand: the CSV body and the verdict against its tolerances.
pub struct Report {
    pub pass: bool,
    pub summary: String,
    pub csv: Vec<u8>,
}

/// Serializes `rows` as CSV with a header line.
pub fn csv_of<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().context("flushing CSV")
}

/// Writes `<command>.csv` and `<command>.json` into the configured output directory.
pub fn write(cfg: &Config, command: &str, report: &Report) -> Result<()> {
    let dir: &Path = &cfg.output_path;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_name = format!("{command}.csv");
    fs::write(dir.join(&csv_name), &report.csv).with_context(|| format!("writing {csv_name}"))?;
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": cfg,
        "pass": report.pass,
        "summary": report.summary,
        "csv": csv_name,
    });
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(dir.join(format!("{command}.json")), text).with_context(|| format!("writing {command}.json"))?;
    Ok(())
}

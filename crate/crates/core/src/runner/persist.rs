use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, RunError, RunOutput};
use crate::metrics::{MetricReport, TOKEN_POLICY};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const RUN_FILE: &str = "run.json";

/// Run metadata written next to the records. Kept free of timestamps so a
/// rerun reproduces it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub git_hash: Option<String>,
    pub token_policy: String,
    pub config: ExperimentConfig,
    pub n_records: usize,
    pub failures: usize,
}

/// What `report.json` holds: enough to rebuild a table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredReport {
    pub model: String,
    pub config: ExperimentConfig,
    pub report: MetricReport,
    pub failures: usize,
}

fn git_hash() -> Option<String> {
    let out = std::process::Command::new("git")
        .args(["rev-parse", "--short=12", "HEAD"])
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
}

/// Writes records.jsonl, report.json and run.json into `dir`.
pub fn write_run(dir: &Path, output: &RunOutput) -> Result<StoredReport, RunError> {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(fs::File::create(dir.join(RECORDS_FILE))?);
    for rec in &output.records {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;

    let stored = StoredReport {
        model: output.config.params.model_name.clone(),
        config: output.config.clone(),
        report: output.report.clone(),
        failures: output.failures,
    };
    fs::write(dir.join(REPORT_FILE), serde_json::to_string_pretty(&stored)? + "\n")?;

    let meta = RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        git_hash: git_hash(),
        token_policy: TOKEN_POLICY.to_string(),
        config: output.config.clone(),
        n_records: output.records.len(),
        failures: output.failures,
    };
    fs::write(dir.join(RUN_FILE), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(stored)
}

/// Reads `report.json` from a run directory.
pub fn read_report(dir: &Path) -> Result<StoredReport, RunError> {
    let text = fs::read_to_string(dir.join(REPORT_FILE))?;
    Ok(serde_json::from_str(&text)?)
}

//! CSV report writing. Bodies are byte-reproducible: floats use a fixed
//! 17-significant-digit format and anything time-dependent lives in the
//! JSON metadata sidecar next to the CSV.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::CliError;

/// One report: a fixed column schema plus string-rendered rows. Every row
/// carries the numeric columns needed to recompute its own verdict.
pub struct Report {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
    /// Replications whose solver failed (recorded in-row, run continued).
    pub solver_failures: u64,
    pub all_pass: bool,
}

impl Report {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Report {
            columns,
            rows: Vec::new(),
            solver_failures: 0,
            all_pass: true,
        }
    }

    pub fn push(&mut self, row: Vec<String>, pass: bool) {
        assert_eq!(row.len(), self.columns.len(), "row/schema mismatch");
        self.rows.push(row);
        self.all_pass &= pass;
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits: round-trips every f64 and keeps bodies diffable.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_bool(b: bool) -> String {
    if b { "pass".into() } else { "fail".into() }
}

pub fn write_report(
    path: &Path,
    report: &Report,
    master_seed: u64,
    wall: std::time::Duration,
) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Config(format!("cannot create {parent:?}: {e}")))?;
        }
    }
    fs::write(path, report.to_csv())
        .map_err(|e| CliError::Config(format!("cannot write {path:?}: {e}")))?;

    let finished = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let meta = serde_json::json!({
        "master_seed": master_seed,
        "git_revision": git_revision(),
        "wall_time_seconds": wall.as_secs_f64(),
        "finished_at_unix_ms": finished,
        "rows": report.rows.len(),
        "solver_failures": report.solver_failures,
        "all_pass": report.all_pass,
    });
    let meta_path = path.with_extension("meta.json");
    fs::write(&meta_path, serde_json::to_string_pretty(&meta).unwrap())
        .map_err(|e| CliError::Config(format!("cannot write {meta_path:?}: {e}")))?;
    Ok(())
}

fn git_revision() -> String {
    Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

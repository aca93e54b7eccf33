//! CSV and JSON writers. Output bytes depend only on the result value.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ilgap_core::bounds::write_json_lines;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::suite::SuiteResult;
use crate::sweep::SweepResult;

pub const SWEEP_CSV_HEADER: [&str; 8] =
    ["algorithm", "gamma", "m", "seed", "value_gap_exact", "value_gap_mc", "bound_rhs", "wall_time_ms"];

pub const SUMMARY_CSV_HEADER: [&str; 4] = ["bound_id", "instances", "min_slack", "violation_rate"];

/// Shortest round-tripping decimal; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// Paths written by [`emit_results`] for the stem `path`.
pub fn result_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("csv"), path.with_extension("json"))
}

/// Writes `<path>.csv` (fixed columns, header only when empty) and
/// `<path>.json` (the full result including the config echo and slopes).
pub fn emit_results(result: &SweepResult, path: &Path) -> Result<(PathBuf, PathBuf)> {
    let (csv_path, json_path) = result_paths(path);
    ensure_parent(&csv_path)?;
    write_file(&csv_path, &sweep_csv(result)?)?;
    write_file(&json_path, &to_json(result)?)?;
    Ok((csv_path, json_path))
}

pub fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.algorithm.as_str().to_string(),
            format_float(r.gamma),
            r.m.to_string(),
            r.seed.to_string(),
            format_float(r.value_gap_exact),
            format_float(r.value_gap_mc),
            format_float(r.bound_rhs),
            r.wall_time_ms.to_string(),
        ])?;
    }
    into_bytes(w)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn load_result(json_path: &Path) -> Result<SweepResult> {
    let text = fs::read_to_string(json_path).map_err(|e| HarnessError::io(json_path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn summary_csv(result: &SuiteResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_CSV_HEADER)?;
    for r in &result.summary {
        w.write_record([
            r.bound_id.as_str().to_string(),
            r.instances.to_string(),
            format_float(r.min_slack),
            format_float(r.violation_rate),
        ])?;
    }
    into_bytes(w)
}

/// Writes `bound_summary.csv` and `bound_reports.jsonl` into `dir`.
pub fn emit_suite(result: &SuiteResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let summary = dir.join("bound_summary.csv");
    write_file(&summary, &summary_csv(result)?)?;
    let mut lines = Vec::new();
    write_json_lines(&result.reports, &mut lines).map_err(|e| HarnessError::io(dir, e))?;
    let reports = dir.join("bound_reports.jsonl");
    write_file(&reports, &lines)?;
    Ok((summary, reports))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(bytes).map_err(|e| HarnessError::io(path, e))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| HarnessError::io(p, e)),
        _ => Ok(()),
    }
}

fn into_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| HarnessError::io("<csv buffer>", e.into_error()))
}

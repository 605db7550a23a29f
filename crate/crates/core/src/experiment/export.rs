//! Flat result records, written as CSV or as a JSON array of the same
//! records. Wall-clock figures never reach an export, so identical runs give
//! identical bytes.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::protocols::{OnlineReport, TestReport, TrainingCurve};
use super::stats::Summary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub scenario: String,
    pub policy: String,
    pub seed: Option<u64>,
    pub axis_name: String,
    pub axis_value: Option<f64>,
    pub window_start_ms: f64,
    pub window_end_ms: f64,
    /// Empty when nothing was delivered in the window.
    pub avg_delivery_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub scenario: String,
    pub policy: String,
    pub axis_name: String,
    pub axis_value: Option<f64>,
    pub n: usize,
    pub mean_ms: Option<f64>,
    pub std_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown format `{other}` (csv|json)")),
        }
    }
}

/// One record per test seed over `[0, horizon)`.
pub fn records_from_test(scenario: &str, report: &TestReport, axis_name: &str, axis_value: Option<f64>) -> Vec<Record> {
    report
        .results
        .iter()
        .map(|r| Record {
            scenario: scenario.to_string(),
            policy: report.policy.clone(),
            seed: Some(r.seed),
            axis_name: axis_name.to_string(),
            axis_value,
            window_start_ms: 0.0,
            window_end_ms: report.horizon_ms,
            avg_delivery_ms: r.avg_delivery_ms,
        })
        .collect()
}

/// One record per training episode; `axis_value` is the episode index.
/// With `smoothed`, the trailing average replaces the raw delay.
pub fn records_from_curve(scenario: &str, curve: &TrainingCurve, smoothed: bool) -> Vec<Record> {
    let (axis, values) = if smoothed {
        ("episode_smoothed", &curve.smoothed)
    } else {
        ("episode", &curve.delays)
    };
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| Record {
            scenario: scenario.to_string(),
            policy: curve.policy.clone(),
            seed: Some(curve.seed),
            axis_name: axis.to_string(),
            axis_value: Some(i as f64),
            window_start_ms: 0.0,
            window_end_ms: curve.episode_ms,
            avg_delivery_ms: v,
        })
        .collect()
}

/// Per-seed window records followed by the seed-averaged curve (empty seed).
pub fn records_from_online(scenario: &str, report: &OnlineReport) -> Vec<Record> {
    let per_seed = report.per_seed.iter().flat_map(|(seed, windows)| {
        windows.iter().map(move |w| Record {
            scenario: scenario.to_string(),
            policy: report.policy.clone(),
            seed: Some(*seed),
            axis_name: "time".into(),
            axis_value: None,
            window_start_ms: w.start,
            window_end_ms: w.end,
            avg_delivery_ms: w.mean(),
        })
    });
    let mean = report.curve.iter().map(|w| Record {
        scenario: scenario.to_string(),
        policy: report.policy.clone(),
        seed: None,
        axis_name: "time".into(),
        axis_value: None,
        window_start_ms: w.start,
        window_end_ms: w.end,
        avg_delivery_ms: w.mean,
    });
    per_seed.chain(mean).collect()
}

pub fn summary_record(
    scenario: &str,
    policy: &str,
    axis_name: &str,
    axis_value: Option<f64>,
    summary: &Summary,
) -> SummaryRecord {
    SummaryRecord {
        scenario: scenario.to_string(),
        policy: policy.to_string(),
        axis_name: axis_name.to_string(),
        axis_value,
        n: summary.n,
        mean_ms: summary.mean,
        std_ms: summary.std,
    }
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Protocol(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_csv_string(records: &[Record]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Protocol("nothing to export".into()));
    }
    csv_string(records)
}

pub fn to_json_string(records: &[Record]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Protocol("nothing to export".into()));
    }
    let mut s = serde_json::to_string_pretty(records)?;
    s.push('\n');
    Ok(s)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `records` to `path` in the given format.
pub fn export(records: &[Record], path: &Path, format: ExportFormat) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => to_csv_string(records)?,
        ExportFormat::Json => to_json_string(records)?,
    };
    write(path, &text)
}

pub fn write_summary_csv(rows: &[SummaryRecord], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Protocol("nothing to export".into()));
    }
    write(path, &csv_string(rows)?)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<Record>> {
    let text = read_text(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<Vec<Record>, _>>()?)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRecord>> {
    let text = read_text(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<Vec<SummaryRecord>, _>>()?)
}

pub fn read_json(path: &Path) -> Result<Vec<Record>> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

//! CSV and JSON output.
//!
//! Both formats are byte-stable: floats use Rust's shortest round-trip
//! representation and series keep their run order.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::run::{Diagnostics, LabeledSeries, RunOutput};
use crate::scenario::Scenario;

pub const CSV_HEADER: &str = "t_seconds,dimensionless_time,value,series_label";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn csv_string(series: &[LabeledSeries]) -> String {
    let mut out = String::with_capacity(64 * series.iter().map(|s| s.series.len()).sum::<usize>() + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in series {
        for (t, v) in s.series.iter() {
            writeln!(out, "{:e},{:e},{:e},{}", t, t * s.time_scale_per_s, v, s.label()).unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonSeries {
    pub label: String,
    pub time_scale_per_s: f64,
    pub t_seconds: Vec<f64>,
    pub dimensionless_time: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub scenario: Scenario,
    pub diagnostics: Diagnostics,
    pub series: Vec<JsonSeries>,
}

impl JsonDocument {
    pub fn new(scenario: &Scenario, series: &[LabeledSeries], diagnostics: Diagnostics) -> Self {
        let series = series
            .iter()
            .map(|s| JsonSeries {
                label: s.label().to_string(),
                time_scale_per_s: s.time_scale_per_s,
                t_seconds: s.series.times().to_vec(),
                dimensionless_time: s.series.times().iter().map(|t| t * s.time_scale_per_s).collect(),
                values: s.series.values().to_vec(),
            })
            .collect();
        Self {
            scenario: scenario.clone(),
            diagnostics,
            series,
        }
    }
}

pub fn json_string(out: &RunOutput) -> String {
    let doc = JsonDocument::new(&out.scenario, &out.series, out.diagnostics);
    let mut s = serde_json::to_string_pretty(&doc).expect("output document serializes");
    s.push('\n');
    s
}

pub fn render(out: &RunOutput, format: Format) -> String {
    match format {
        Format::Csv => csv_string(&out.series),
        Format::Json => json_string(out),
    }
}

/// Writes `contents` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), ScenarioError> {
    let io = |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    };
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(parent).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit(out: &RunOutput, format: Format, path: &Path) -> Result<(), ScenarioError> {
    write_atomic(path, &render(out, format))
}

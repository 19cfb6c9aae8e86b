//! Report files. Everything is staged under a `.partial` name and renamed
//! only once every file of the command has been written.

use std::fs;
use std::path::{Path, PathBuf};

use eicl_core::report::RunReport;
use eicl_gateway::TraceEntry;

use crate::config::{format_axis_value, SweepAxis};
use crate::error::{Result, RunError};
use crate::pilot::PilotReport;

/// Files staged for one command.
#[derive(Debug)]
pub struct Staged {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

impl Staged {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| RunError::io(&dir, e))?;
        Ok(Staged { dir, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let target = self.dir.join(name);
        let partial = partial_path(&target);
        fs::write(&partial, bytes).map_err(|e| RunError::io(&partial, e))?;
        self.files.push(target);
        Ok(())
    }

    /// Renames every staged file into place.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        for target in &self.files {
            let partial = partial_path(target);
            fs::rename(&partial, target).map_err(|e| RunError::io(target, e))?;
        }
        Ok(self.files)
    }
}

/// Flat per-query CSV: id, gold, prediction, correct, top_score.
pub fn predictions_csv(report: &RunReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "gold", "prediction", "correct", "top_score"])?;
    for r in &report.results.records {
        let prediction = r.prediction.label().map(|l| l.as_str()).unwrap_or("");
        let top = r.demos.first().map(|d| d.score.to_string()).unwrap_or_default();
        w.write_record([
            r.query_id.as_str(),
            r.gold.as_str(),
            prediction,
            if r.correct() { "1" } else { "0" },
            top.as_str(),
        ])?;
    }
    into_bytes(w)
}

fn into_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| RunError::Config(format!("csv buffer: {e}")))
}

pub fn trace_jsonl(entries: &[TraceEntry]) -> Vec<u8> {
    let mut out = Vec::new();
    for e in entries {
        out.extend(serde_json::to_vec(e).expect("trace entry serializes"));
        out.push(b'\n');
    }
    out
}

pub fn write_run(dir: &Path, report: &RunReport, trace: &[TraceEntry]) -> Result<Vec<PathBuf>> {
    let mut staged = Staged::new(dir)?;
    staged.write("report.json", report.to_json().as_bytes())?;
    staged.write("predictions.csv", &predictions_csv(report)?)?;
    staged.write("trace.jsonl", &trace_jsonl(trace))?;
    staged.commit()
}

pub fn sweep_report_name(axis: SweepAxis, value: f64) -> String {
    format!("report_{axis}_{}.json", format_axis_value(axis, value))
}

pub fn sweep_summary_csv(axis: SweepAxis, runs: &[(f64, RunReport)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "axis",
        "value",
        "accuracy",
        "macro_f1",
        "unparseable_count",
        "transport_failures",
    ])?;
    for (v, r) in runs {
        w.write_record([
            axis.to_string(),
            format_axis_value(axis, *v),
            r.results.accuracy.to_string(),
            r.results.macro_f1.to_string(),
            r.results.unparseable_count.to_string(),
            r.results.transport_failures.to_string(),
        ])?;
    }
    into_bytes(w)
}

pub fn write_sweep(
    dir: &Path,
    axis: SweepAxis,
    runs: &[(f64, RunReport)],
    trace: &[TraceEntry],
) -> Result<Vec<PathBuf>> {
    let mut staged = Staged::new(dir)?;
    for (v, r) in runs {
        staged.write(&sweep_report_name(axis, *v), r.to_json().as_bytes())?;
    }
    staged.write("sweep_summary.csv", &sweep_summary_csv(axis, runs)?)?;
    staged.write("trace.jsonl", &trace_jsonl(trace))?;
    staged.commit()
}

pub fn pilot_csv(report: &PilotReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lower", "upper", "count", "correct", "accuracy"])?;
    for b in &report.bins {
        w.write_record([
            b.lower.to_string(),
            b.upper.to_string(),
            b.count.to_string(),
            b.correct.to_string(),
            b.accuracy.map(|a| a.to_string()).unwrap_or_default(),
        ])?;
    }
    into_bytes(w)
}

pub fn write_pilot(dir: &Path, report: &PilotReport, trace: &[TraceEntry]) -> Result<Vec<PathBuf>> {
    let mut staged = Staged::new(dir)?;
    let mut json = serde_json::to_string_pretty(report).expect("pilot report serializes");
    json.push('\n');
    staged.write("pilot.json", json.as_bytes())?;
    staged.write("pilot.csv", &pilot_csv(report)?)?;
    staged.write("trace.jsonl", &trace_jsonl(trace))?;
    staged.commit()
}

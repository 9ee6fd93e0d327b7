//! Structured progress lines on stderr and the JSON run report.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::FormatError;

/// Writes one `key=value` line to stderr. Values containing spaces or quotes
/// are quoted.
pub fn log(event: &str, fields: &[(&str, String)]) {
    let mut line = format!("event={event}");
    for (k, v) in fields {
        if v.is_empty() || v.contains([' ', '"', '=']) {
            let _ = write!(line, " {k}={v:?}");
        } else {
            let _ = write!(line, " {k}={v}");
        }
    }
    eprintln!("{line}");
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    /// Pair or camera label, empty for whole-run stages.
    pub item: String,
    pub frames: usize,
    pub elapsed_ms: f64,
}

/// Collects stage timings for the report.
#[derive(Debug)]
pub struct Telemetry {
    start: Instant,
    pub stages: Vec<StageTiming>,
}

impl Default for Telemetry {
    fn default() -> Self {
        Self::new()
    }
}

impl Telemetry {
    pub fn new() -> Self {
        Self { start: Instant::now(), stages: Vec::new() }
    }

    /// Runs `f`, logs its duration and records it.
    pub fn stage<T, E>(&mut self, stage: &str, item: &str, frames: usize, f: impl FnOnce() -> Result<T, E>) -> Result<T, E> {
        let t0 = Instant::now();
        log("stage_start", &[("stage", stage.into()), ("item", item.into()), ("frames", frames.to_string())]);
        let out = f();
        let elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
        let status = if out.is_ok() { "ok" } else { "failed" };
        log(
            "stage_end",
            &[
                ("stage", stage.into()),
                ("item", item.into()),
                ("frames", frames.to_string()),
                ("status", status.into()),
                ("elapsed_ms", format!("{elapsed_ms:.1}")),
            ],
        );
        self.stages.push(StageTiming { stage: stage.into(), item: item.into(), frames, elapsed_ms });
        out
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }
}

/// Machine-readable run summary written to `--report`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: String,
    pub threads: usize,
    pub elapsed_ms: f64,
    pub stages: Vec<StageTiming>,
    pub error: Option<String>,
    pub failed_stage: Option<String>,
    pub summary: serde_json::Value,
}

impl RunReport {
    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        crate::write_json(path, self)
    }
}

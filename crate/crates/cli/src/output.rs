//! Output directory, resolved config and run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliResult;
use crate::settings::Settings;

/// Collects the files a command writes and records them in `manifest.json`.
pub struct RunOutput {
    dir: PathBuf,
    svg: bool,
    files: Vec<String>,
    started: Instant,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    seeds: &'a [u64],
    wall_seconds: f64,
    files: &'a [String],
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    details: serde_json::Value,
}

impl RunOutput {
    pub fn create(settings: &Settings) -> CliResult<RunOutput> {
        let dir = PathBuf::from(settings.raw("out"));
        fs::create_dir_all(&dir)?;
        let mut out = RunOutput {
            dir,
            svg: settings.get("svg")?,
            files: Vec::new(),
            started: Instant::now(),
        };
        out.write("config.resolved", &settings.resolved())?;
        Ok(out)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn svg_enabled(&self) -> bool {
        self.svg
    }

    pub fn write(&mut self, name: &str, content: &str) -> CliResult<()> {
        fs::write(self.dir.join(name), content)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes an SVG only when `--svg` was requested.
    pub fn write_svg(&mut self, name: &str, render: impl FnOnce() -> String) -> CliResult<()> {
        if self.svg {
            self.write(name, &render())?;
        }
        Ok(())
    }

    /// Writes `manifest.json` with command-specific `details`. Wall-clock
    /// data lives only here, so the CSVs stay byte-identical across reruns.
    pub fn finish(mut self, settings: &Settings, seeds: &[u64], details: serde_json::Value) -> CliResult<PathBuf> {
        self.files.push("manifest.json".into());
        let manifest = Manifest {
            command: settings.command(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: settings.hash(),
            seeds,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            files: &self.files,
            details,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(self.dir.join("manifest.json"), text + "\n")?;
        Ok(self.dir)
    }
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Shortest round-trip formatting of an optional value; empty when absent.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Equal-width histogram over `[-h, h]` with `h` the largest magnitude in
/// `values` (1 when all are zero), as `(lo, hi, count)` bins.
pub fn symmetric_histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, u64)> {
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let half = if max_abs > 0.0 { max_abs } else { 1.0 };
    let width = 2.0 * half / bins as f64;
    let mut counts = vec![0u64; bins];
    for v in values {
        let idx = (((v + half) / width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (-half + i as f64 * width, -half + (i + 1) as f64 * width, c))
        .collect()
}

/// `bin_lo,bin_hi,count` CSV of a histogram.
pub fn histogram_csv(hist: &[(f64, f64, u64)]) -> String {
    csv(
        "bin_lo,bin_hi,count",
        hist.iter()
            .map(|(lo, hi, c)| vec![lo.to_string(), hi.to_string(), c.to_string()]),
    )
}

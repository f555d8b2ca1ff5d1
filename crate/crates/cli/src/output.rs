//! Result rows and their CSV / JSON serialization.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::Format;

/// One detector run. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub dataset: String,
    pub seed: u64,
    /// Lowest `mse` over all seeds of the same method and dataset.
    pub mse_best: Option<f64>,
    pub mse: Option<f64>,
    pub jc: f64,
    pub removed_count: usize,
    pub surviving_n: usize,
    pub runtime_ms: u64,
    pub early_stop: bool,
}

/// One removed point, keyed by its row in the original dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedRow {
    pub method: String,
    pub dataset: String,
    pub seed: u64,
    pub iteration: usize,
    pub id: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub dataset: String,
    pub mse_best: Option<f64>,
    pub mse_median: Option<f64>,
    pub runs: usize,
    pub failures: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRowOut {
    pub threshold: f64,
    pub mse_median: f64,
    pub removed_median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCellOut {
    pub threshold: f64,
    pub seed: u64,
    pub mse: f64,
    pub removed_count: usize,
    pub first_pass_removed: usize,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Writes `rows` to `dir/stem.{csv,json}` and returns the path.
pub fn write_rows<R: Serialize>(
    dir: &Path,
    stem: &str,
    format: Format,
    rows: &[R],
) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.extension()));
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(rows)?;
            text.push('\n');
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(path)
}

/// Reads rows written by [`write_rows`]; the format follows the extension.
pub fn read_rows<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<R>> {
    if path.extension().is_some_and(|e| e == "json") {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    } else {
        let mut r =
            csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(r.deserialize().collect::<Result<Vec<R>, _>>()?)
    }
}

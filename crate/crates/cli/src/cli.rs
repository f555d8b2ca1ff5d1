//! Argument definitions and their mapping onto [`RunConfig`].

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use igk_core::GenSpec;

use crate::commands::{PlotKind, PlotSpec};
use crate::config::{DatasetEntry, Format, Method, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "igk",
    version,
    about = "Clustering with iterative outlier removal"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method once per seed.
    Run(Overrides),
    /// Compare methods across datasets.
    Bench(BenchArgs),
    /// Error and removal counts over a grid of thresholds.
    Sweep(SweepArgs),
    /// Generate a synthetic dataset with ground truth.
    Gen(GenArgs),
    /// Render an SVG figure from result files.
    Plot(PlotArgs),
}

/// Flags shared by `run`, `bench` and `sweep`; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Seeds, comma separated or repeated.
    #[arg(long = "seed", value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Removal threshold (the indegree threshold for odin).
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "k-prime")]
    pub k_prime: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Record wall-clock runtimes (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(p) = &self.data {
            cfg.data = Some(p.clone());
        }
        if let Some(p) = &self.truth {
            cfg.truth = Some(p.clone());
        }
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if let Some(t) = self.threshold {
            if cfg.method == Method::Odin {
                cfg.odin.threshold = t;
            } else {
                cfg.removal.threshold = t;
            }
        }
        if let Some(i) = self.iterations {
            cfg.removal.iterations = i;
        }
        if let Some(k) = self.k {
            cfg.k = Some(k);
        }
        if let Some(kp) = self.k_prime {
            cfg.igk.k_prime = Some(kp);
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.timing |= self.timing;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// `NAME=DATA,TRUTH`; replaces the datasets listed in the config file.
    #[arg(long = "dataset")]
    pub datasets: Vec<String>,
    /// Methods to compare, comma separated.
    #[arg(long = "methods", value_enum, value_delimiter = ',')]
    pub methods: Vec<Method>,
}

impl BenchArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = self.common.resolve()?;
        if !self.datasets.is_empty() {
            cfg.datasets = self
                .datasets
                .iter()
                .map(|s| parse_dataset(s))
                .collect::<Result<_>>()?;
        }
        if !self.methods.is_empty() {
            cfg.methods = self.methods.clone();
        }
        Ok(cfg)
    }
}

fn parse_dataset(s: &str) -> Result<DatasetEntry> {
    let (name, paths) = s
        .split_once('=')
        .ok_or_else(|| anyhow::anyhow!("expected NAME=DATA,TRUTH, got `{s}`"))?;
    let (data, truth) = paths
        .split_once(',')
        .ok_or_else(|| anyhow::anyhow!("expected NAME=DATA,TRUTH, got `{s}`"))?;
    Ok(DatasetEntry {
        name: name.to_string(),
        data: data.into(),
        truth: truth.into(),
        k: None,
    })
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Threshold grid, comma separated (default 0.5 to 1.0 in steps of 0.05).
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<f64>,
    /// Also write the curve as SVG here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = self.common.resolve()?;
        if !self.thresholds.is_empty() {
            cfg.thresholds = self.thresholds.clone();
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    #[arg(long = "per-cluster", default_value_t = 100)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long = "box-lo", default_value_t = 0.0, allow_hyphen_values = true)]
    pub box_lo: f64,
    #[arg(long = "box-hi", default_value_t = 100.0, allow_hyphen_values = true)]
    pub box_hi: f64,
    #[arg(long = "outlier-fraction", default_value_t = 0.0)]
    pub outlier_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "data-out")]
    pub data_out: PathBuf,
    #[arg(long = "truth-out")]
    pub truth_out: PathBuf,
}

impl GenArgs {
    pub fn spec(&self) -> GenSpec {
        GenSpec {
            num_clusters: self.clusters,
            points_per_cluster: self.per_cluster,
            dimension: self.dim,
            spread: self.spread,
            box_lo: self.box_lo,
            box_hi: self.box_hi,
            outlier_fraction: self.outlier_fraction,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub centroids: Option<PathBuf>,
    #[arg(long)]
    pub removed: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

impl PlotArgs {
    pub fn spec(&self) -> PlotSpec {
        PlotSpec {
            kind: self.kind,
            data: self.data.clone(),
            centroids: self.centroids.clone(),
            removed: self.removed.clone(),
            seed: self.seed,
            sweep: self.sweep.clone(),
            out: self.out.clone(),
        }
    }
}

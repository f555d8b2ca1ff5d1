//! Declarative run configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use igk_core::{Detector, GaConfig, IgkConfig, OdinConfig, RemovalConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kmeans,
    Odin,
    Orc,
    Proposed,
    Igk,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Method::Kmeans,
            "odin" => Method::Odin,
            "orc" => Method::Orc,
            "proposed" => Method::Proposed,
            "igk" => Method::Igk,
            other => bail!("unknown method `{other}`"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_prob: f64,
    pub mutation_scale: f64,
    pub elitism: usize,
    pub tournament_size: usize,
    pub stall_generations: usize,
}

impl Default for GaSection {
    fn default() -> Self {
        let d = GaConfig::default();
        Self {
            population_size: d.population_size,
            generations: d.generations,
            mutation_prob: d.mutation_prob,
            mutation_scale: d.mutation_scale,
            elitism: d.elitism,
            tournament_size: d.tournament_size,
            stall_generations: d.stall_generations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IgkSection {
    /// Defaults to `2k` when absent.
    pub k_prime: Option<usize>,
    pub num_subsamples: usize,
    pub subsample_fraction: f64,
}

impl Default for IgkSection {
    fn default() -> Self {
        Self {
            k_prime: None,
            num_subsamples: 5,
            subsample_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemovalSection {
    pub iterations: usize,
    pub threshold: f64,
}

impl Default for RemovalSection {
    fn default() -> Self {
        Self {
            iterations: 10,
            threshold: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdinSection {
    pub knn_k: usize,
    pub threshold: f64,
}

impl Default for OdinSection {
    fn default() -> Self {
        Self {
            knn_k: 10,
            threshold: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KmeansSection {
    pub restarts: usize,
}

impl Default for KmeansSection {
    fn default() -> Self {
        Self { restarts: 10 }
    }
}

/// One dataset of a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub data: PathBuf,
    pub truth: PathBuf,
    pub k: Option<usize>,
}

/// Everything a command needs. Every field has a default so partial files
/// are fine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub data: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    /// Target cluster count; falls back to the number of true centroids.
    pub k: Option<usize>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub format: Format,
    /// Record wall-clock time in `runtime_ms`; off by default so output
    /// files are reproducible byte for byte.
    pub timing: bool,
    pub ga: GaSection,
    pub igk: IgkSection,
    pub removal: RemovalSection,
    pub odin: OdinSection,
    pub kmeans: KmeansSection,
    /// Benchmark datasets.
    pub datasets: Vec<DatasetEntry>,
    /// Benchmark methods.
    pub methods: Vec<Method>,
    /// Sweep grid.
    pub thresholds: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Proposed,
            data: None,
            truth: None,
            k: None,
            seeds: vec![0],
            out: PathBuf::from("results"),
            format: Format::Csv,
            timing: false,
            ga: GaSection::default(),
            igk: IgkSection::default(),
            removal: RemovalSection::default(),
            odin: OdinSection::default(),
            kmeans: KmeansSection::default(),
            datasets: Vec::new(),
            methods: vec![Method::Kmeans, Method::Orc, Method::Proposed],
            thresholds: default_thresholds(),
        }
    }
}

/// 0.5, 0.55, ..., 1.0.
pub fn default_thresholds() -> Vec<f64> {
    (0..=10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn ga_config(&self) -> GaConfig {
        let g = &self.ga;
        GaConfig {
            population_size: g.population_size,
            generations: g.generations,
            mutation_prob: g.mutation_prob,
            mutation_scale: g.mutation_scale,
            elitism: g.elitism,
            tournament_size: g.tournament_size,
            stall_generations: g.stall_generations,
            seed: 0,
        }
    }

    pub fn igk_config(&self, k: usize) -> IgkConfig {
        IgkConfig {
            k,
            k_prime: self.igk.k_prime.unwrap_or(2 * k),
            num_subsamples: self.igk.num_subsamples,
            subsample_fraction: self.igk.subsample_fraction,
            ga: self.ga_config(),
        }
    }

    pub fn removal_config(&self) -> RemovalConfig {
        RemovalConfig {
            iterations: self.removal.iterations,
            threshold: self.removal.threshold,
            seed: 0,
            allow_threshold_one: false,
        }
    }

    /// Builds the detector for `method` at `k` clusters.
    pub fn detector(&self, method: Method, k: usize) -> Detector {
        match method {
            Method::Kmeans => Detector::KMeans {
                k,
                restarts: self.kmeans.restarts,
            },
            Method::Igk => Detector::Igk(self.igk_config(k)),
            Method::Odin => Detector::Odin(OdinConfig {
                knn_k: self.odin.knn_k,
                threshold: self.odin.threshold,
                kmeans_k: k,
                restarts: self.kmeans.restarts,
                seed: 0,
            }),
            Method::Orc => Detector::Orc {
                k,
                restarts: self.kmeans.restarts,
                removal: self.removal_config(),
            },
            Method::Proposed => Detector::Proposed {
                igk: self.igk_config(k),
                removal: self.removal_config(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        if self.kmeans.restarts == 0 {
            bail!("kmeans.restarts must be at least 1");
        }
        Ok(())
    }
}

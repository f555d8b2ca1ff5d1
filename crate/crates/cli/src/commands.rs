//! The `run`, `bench`, `sweep`, `gen` and `plot` subcommands.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use igk_core::dataset::rows_to_text;
use igk_core::evaluation::{median, threshold_sweep};
use igk_core::{
    generate, load_dataset, load_ground_truth, run_detector, write_points, Centroids64, DataSet64,
    Detector, GenSpec, GroundTruth64,
};
use log::warn;
use rayon::prelude::*;

use crate::config::{DatasetEntry, Method, RunConfig};
use crate::output::{
    read_rows, write_rows, BenchRow, MetricsRow, RemovedRow, SweepCellOut, SweepRowOut,
};
use crate::plot::{curve_svg, scatter_svg};

/// Expected `(N, M)` of the public A-sets.
pub fn aset_expectation(name: &str) -> Option<(usize, usize)> {
    match name.to_ascii_lowercase().as_str() {
        "a1" => Some((3000, 20)),
        "a2" => Some((5250, 35)),
        "a3" => Some((7500, 50)),
        _ => None,
    }
}

/// Mismatches between a loaded A-set and its published size.
pub fn check_aset_size(name: &str, n: usize, m: Option<usize>) -> Vec<String> {
    let mut problems = Vec::new();
    if let Some((en, em)) = aset_expectation(name) {
        if n != en {
            problems.push(format!("{name}: expected N={en}, loaded {n} points"));
        }
        if let Some(m) = m {
            if m != em {
                problems.push(format!("{name}: expected M={em}, loaded {m} centroids"));
            }
        }
    }
    problems
}

pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into())
}

fn resolve_k(explicit: Option<usize>, truth: Option<&GroundTruth64>) -> Result<usize> {
    match (explicit, truth) {
        (Some(k), _) => Ok(k),
        (None, Some(t)) => Ok(t.len()),
        (None, None) => bail!("number of clusters unknown: pass --k or a ground-truth file"),
    }
}

/// Output of one `(method, dataset, seed)` run.
#[derive(Debug, Clone)]
pub struct Cell {
    pub metrics: MetricsRow,
    pub removed: Vec<RemovedRow>,
    pub centroids: Centroids64,
}

pub fn run_cell(
    data: &DataSet64,
    truth: Option<&GroundTruth64>,
    detector: &Detector,
    dataset: &str,
    seed: u64,
    timing: bool,
) -> Result<Cell> {
    let start = Instant::now();
    let outcome = run_detector(data, detector, seed)?;
    let runtime_ms = if timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let m = outcome.metrics(truth, seed, runtime_ms)?;
    let method = detector.name().to_string();
    let removed = outcome
        .removed
        .iter()
        .map(|r| RemovedRow {
            method: method.clone(),
            dataset: dataset.to_string(),
            seed,
            iteration: r.iteration,
            id: r.id,
            factor: r.factor,
        })
        .collect();
    Ok(Cell {
        metrics: MetricsRow {
            method,
            dataset: dataset.to_string(),
            seed,
            mse_best: None,
            mse: m.mse,
            jc: m.jc_final,
            removed_count: m.removed_count,
            surviving_n: m.surviving_n,
            runtime_ms: m.runtime_ms,
            early_stop: m.early_stop,
        },
        removed,
        centroids: outcome.clustering.centroids,
    })
}

fn fill_best(rows: &mut [MetricsRow]) {
    let best = rows.iter().filter_map(|r| r.mse).reduce(f64::min);
    for r in rows {
        r.mse_best = best;
    }
}

/// What `run` wrote.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: Vec<MetricsRow>,
    pub files: Vec<PathBuf>,
}

/// Runs one method once per seed and writes metrics, removals and centers.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let data_path = cfg.data.as_ref().context("no dataset given (--data)")?;
    let data = load_dataset::<f64>(data_path)
        .with_context(|| format!("loading {}", data_path.display()))?;
    let truth = cfg
        .truth
        .as_ref()
        .map(|p| {
            load_ground_truth::<f64>(p, data.dim())
                .with_context(|| format!("loading {}", p.display()))
        })
        .transpose()?;
    let k = resolve_k(cfg.k, truth.as_ref())?;
    let detector = cfg.detector(cfg.method, k);
    let name = dataset_name(data_path);
    for problem in check_aset_size(&name, data.len(), truth.as_ref().map(|t| t.len())) {
        warn!("{problem}");
    }

    let cells = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_cell(&data, truth.as_ref(), &detector, &name, seed, cfg.timing))
        .collect::<Result<Vec<_>>>()?;

    let mut metrics: Vec<MetricsRow> = cells.iter().map(|c| c.metrics.clone()).collect();
    fill_best(&mut metrics);
    let removed: Vec<RemovedRow> = cells
        .iter()
        .flat_map(|c| c.removed.iter().cloned())
        .collect();

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut files = vec![
        write_rows(&cfg.out, "metrics", cfg.format, &metrics)?,
        write_rows(&cfg.out, "removed", cfg.format, &removed)?,
    ];
    for c in &cells {
        let path = cfg.out.join(format!(
            "centroids_{}_seed{}.txt",
            detector.name(),
            c.metrics.seed
        ));
        write_points(&path, c.centroids.centers())?;
        files.push(path);
    }
    Ok(RunOutput { metrics, files })
}

/// What `bench` produced.
#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub grid: Vec<BenchRow>,
    pub metrics: Vec<MetricsRow>,
    pub table: String,
}

struct LoadedSet {
    entry: DatasetEntry,
    loaded: Result<(DataSet64, GroundTruth64, usize), String>,
}

fn load_entry(entry: &DatasetEntry) -> LoadedSet {
    let loaded = (|| -> Result<_> {
        let data = load_dataset::<f64>(&entry.data)
            .with_context(|| format!("loading {}", entry.data.display()))?;
        let truth = load_ground_truth::<f64>(&entry.truth, data.dim())
            .with_context(|| format!("loading {}", entry.truth.display()))?;
        for problem in check_aset_size(&entry.name, data.len(), Some(truth.len())) {
            warn!("{problem}");
        }
        let k = entry.k.unwrap_or(truth.len());
        Ok((data, truth, k))
    })()
    .map_err(|e| format!("{e:#}"));
    LoadedSet {
        entry: entry.clone(),
        loaded,
    }
}

/// Runs every method on every dataset over the seed list. Failures are
/// recorded per cell and do not stop the benchmark.
pub fn cmd_bench(cfg: &RunConfig) -> Result<BenchOutput> {
    cfg.validate()?;
    if cfg.datasets.is_empty() {
        bail!("no benchmark datasets configured");
    }
    if cfg.methods.is_empty() {
        bail!("no benchmark methods configured");
    }
    let sets: Vec<LoadedSet> = cfg.datasets.iter().map(load_entry).collect();

    let jobs: Vec<(usize, Method, u64)> = (0..sets.len())
        .flat_map(|s| {
            cfg.methods
                .iter()
                .flat_map(move |&m| cfg.seeds.iter().map(move |&seed| (s, m, seed)))
        })
        .collect();
    let results: Vec<Result<Cell, String>> = jobs
        .par_iter()
        .map(|&(s, method, seed)| {
            let set = &sets[s];
            let (data, truth, k) = set.loaded.as_ref().map_err(Clone::clone)?;
            let det = cfg.detector(method, *k);
            run_cell(data, Some(truth), &det, &set.entry.name, seed, cfg.timing)
                .map_err(|e| format!("{e:#}"))
        })
        .collect();

    let mut grid = Vec::new();
    let mut metrics = Vec::new();
    let mut i = 0;
    for set in &sets {
        for &method in &cfg.methods {
            let chunk = &results[i..i + cfg.seeds.len()];
            i += cfg.seeds.len();
            let mut rows: Vec<MetricsRow> = chunk
                .iter()
                .filter_map(|r| r.as_ref().ok())
                .map(|c| c.metrics.clone())
                .collect();
            fill_best(&mut rows);
            let mses: Vec<f64> = rows.iter().filter_map(|r| r.mse).collect();
            let error = chunk.iter().find_map(|r| r.as_ref().err().cloned());
            grid.push(BenchRow {
                method: cfg.detector(method, 1).name().to_string(),
                dataset: set.entry.name.clone(),
                mse_best: mses.iter().copied().reduce(f64::min),
                mse_median: (!mses.is_empty()).then(|| median(&mses)),
                runs: rows.len(),
                failures: chunk.len() - rows.len(),
                error,
            });
            metrics.extend(rows);
        }
    }

    let table = bench_table(&grid, &cfg.methods, &sets);
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    write_rows(&cfg.out, "bench", cfg.format, &grid)?;
    write_rows(&cfg.out, "metrics", cfg.format, &metrics)?;
    fs::write(cfg.out.join("bench_table.txt"), &table)?;
    Ok(BenchOutput {
        grid,
        metrics,
        table,
    })
}

/// Methods as rows, datasets as columns, best and median MSE per cell.
fn bench_table(grid: &[BenchRow], methods: &[Method], sets: &[LoadedSet]) -> String {
    let mut out = String::new();
    for (label, pick) in [("best MSE", 0), ("median MSE", 1)] {
        write!(out, "{label:<12}").unwrap();
        for s in sets {
            write!(out, "{:>16}", s.entry.name).unwrap();
        }
        out.push('\n');
        for (mi, _) in methods.iter().enumerate() {
            let name = &grid[mi].method;
            write!(out, "{name:<12}").unwrap();
            for si in 0..sets.len() {
                let row = &grid[si * methods.len() + mi];
                let v = if pick == 0 {
                    row.mse_best
                } else {
                    row.mse_median
                };
                match v {
                    Some(v) => write!(out, "{v:>16.2}").unwrap(),
                    None => write!(out, "{:>16}", "failed").unwrap(),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Runs the configured method over the threshold grid and writes the
/// per-threshold medians, the per-seed cells and optionally a plot.
pub fn cmd_sweep(cfg: &RunConfig, plot: Option<&Path>) -> Result<Vec<SweepRowOut>> {
    cfg.validate()?;
    if cfg.thresholds.is_empty() {
        bail!("empty threshold grid");
    }
    let data_path = cfg.data.as_ref().context("no dataset given (--data)")?;
    let truth_path = cfg
        .truth
        .as_ref()
        .context("sweeps need a ground-truth file (--truth)")?;
    let data = load_dataset::<f64>(data_path)
        .with_context(|| format!("loading {}", data_path.display()))?;
    let truth = load_ground_truth::<f64>(truth_path, data.dim())
        .with_context(|| format!("loading {}", truth_path.display()))?;
    let k = resolve_k(cfg.k, Some(&truth))?;
    let detector = cfg.detector(cfg.method, k);

    let per_threshold = cfg
        .thresholds
        .par_iter()
        .map(|&t| {
            threshold_sweep(&data, &truth, &detector, &[t], &cfg.seeds).map(|mut v| v.remove(0))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows: Vec<SweepRowOut> = per_threshold
        .iter()
        .map(|r| SweepRowOut {
            threshold: r.threshold,
            mse_median: r.median_mse,
            removed_median: r.median_removed,
        })
        .collect();
    let cells: Vec<SweepCellOut> = per_threshold
        .iter()
        .flat_map(|r| {
            r.cells.iter().map(|c| SweepCellOut {
                threshold: r.threshold,
                seed: c.seed,
                mse: c.mse,
                removed_count: c.removed_count,
                first_pass_removed: c.first_pass_removed,
            })
        })
        .collect();

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    write_rows(&cfg.out, "sweep", cfg.format, &rows)?;
    write_rows(&cfg.out, "sweep_cells", cfg.format, &cells)?;
    if let Some(path) = plot {
        fs::write(path, sweep_plot(&rows, detector.name()))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rows)
}

fn sweep_plot(rows: &[SweepRowOut], method: &str) -> String {
    let xy: Vec<[f64; 2]> = rows.iter().map(|r| [r.threshold, r.mse_median]).collect();
    curve_svg(
        &format!("{method}: median MSE vs threshold"),
        "threshold T",
        "MSE",
        &xy,
    )
}

/// Writes a generated dataset and its true centers.
pub fn cmd_gen(spec: &GenSpec, data_out: &Path, truth_out: &Path) -> Result<(usize, usize)> {
    let (data, truth) = generate::<f64>(spec)?;
    fs::write(data_out, data.to_text())
        .with_context(|| format!("writing {}", data_out.display()))?;
    fs::write(truth_out, rows_to_text(truth.centroids.centers()))
        .with_context(|| format!("writing {}", truth_out.display()))?;
    Ok((data.len(), truth.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    ScatterClusters,
    ScatterRemoved,
    MseVsThreshold,
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub data: Option<PathBuf>,
    pub centroids: Option<PathBuf>,
    /// Removed-point table written by `run`.
    pub removed: Option<PathBuf>,
    /// Which run of the removed table to draw; defaults to the first seed in it.
    pub seed: Option<u64>,
    /// Threshold table written by `sweep`.
    pub sweep: Option<PathBuf>,
    pub out: PathBuf,
}

fn as_xy(p: &[f64]) -> [f64; 2] {
    [p[0], p[1]]
}

pub fn cmd_plot(spec: &PlotSpec) -> Result<()> {
    let svg = match spec.kind {
        PlotKind::MseVsThreshold => {
            let path = spec
                .sweep
                .as_ref()
                .context("--sweep is required for mse-vs-threshold")?;
            let rows: Vec<SweepRowOut> = read_rows(path)?;
            sweep_plot(&rows, &dataset_name(path))
        }
        PlotKind::ScatterClusters | PlotKind::ScatterRemoved => {
            let data_path = spec
                .data
                .as_ref()
                .context("--data is required for scatter plots")?;
            let data = load_dataset::<f64>(data_path)?;
            if data.dim() != 2 {
                bail!("scatter plots need 2-d data, got {} dimensions", data.dim());
            }
            let cpath = spec
                .centroids
                .as_ref()
                .context("--centroids is required for scatter plots")?;
            let centroids = load_ground_truth::<f64>(cpath, 2)?.centroids;

            let removed: HashSet<usize> = if spec.kind == PlotKind::ScatterRemoved {
                let rpath = spec
                    .removed
                    .as_ref()
                    .context("--removed is required for scatter-removed")?;
                let rows: Vec<RemovedRow> = read_rows(rpath)?;
                let seed = spec.seed.or_else(|| rows.first().map(|r| r.seed));
                rows.iter()
                    .filter(|r| Some(r.seed) == seed)
                    .map(|r| r.id)
                    .collect()
            } else {
                HashSet::new()
            };
            let kept = data.remove_points(&removed)?;
            let labels: Vec<usize> = kept.points().map(|p| centroids.nearest(p).0).collect();
            let points: Vec<[f64; 2]> = kept.points().map(as_xy).collect();
            let gone: Vec<[f64; 2]> = data
                .iter()
                .filter(|(id, _)| removed.contains(id))
                .map(|(_, p)| as_xy(p))
                .collect();
            let centers: Vec<[f64; 2]> = centroids.centers().map(as_xy).collect();
            let title = format!(
                "{} ({} clusters, {} removed)",
                dataset_name(data_path),
                centers.len(),
                gone.len()
            );
            scatter_svg(&title, &points, &labels, &centers, &gone)
        }
    };
    fs::write(&spec.out, svg).with_context(|| format!("writing {}", spec.out.display()))?;
    Ok(())
}

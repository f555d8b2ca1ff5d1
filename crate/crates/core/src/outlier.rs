//! Outlier detectors: indegree scoring on a kNN graph (ODIN), iterative
//! removal around k-means (ORC), and iterative removal around improved
//! genetic k-means.

use std::collections::HashSet;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::genetic::{genetic_kmeans, igk, GaConfig, IgkConfig};
use crate::kmeans::{
    kmeans_multistart, lloyd, Centroids, ClusteringResult, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
use crate::scalar::{sq_dist, Scalar};

/// Directed k-nearest-neighbor graph over dataset positions.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph<T> {
    pub k: usize,
    /// Per vertex, `(neighbor position, distance)` in increasing distance.
    pub out_edges: Vec<Vec<(usize, T)>>,
    /// Number of edges pointing at each vertex.
    pub indegree: Vec<usize>,
}

/// Exact kNN graph by exhaustive search. Distance ties go to the lower id.
pub fn build_knn_graph<T: Scalar>(data: &DataSet<T>, k: usize) -> Result<KnnGraph<T>> {
    let n = data.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "kNN graph needs 0 < k < N, got k={k}, N={n}"
        )));
    }
    let mut out_edges = Vec::with_capacity(n);
    let mut indegree = vec![0; n];
    let mut cand: Vec<(T, usize, usize)> = Vec::with_capacity(n - 1);
    for (i, p) in data.points().enumerate() {
        cand.clear();
        cand.extend(
            data.points()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, q)| (sq_dist(p, q), data.id(j), j)),
        );
        let order = |a: &(T, usize, usize), b: &(T, usize, usize)| {
            a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1))
        };
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, order);
            cand.truncate(k);
        }
        cand.sort_unstable_by(order);
        let edges: Vec<(usize, T)> = cand.iter().map(|&(d, _, j)| (j, d.sqrt())).collect();
        for &(j, _) in &edges {
            indegree[j] += 1;
        }
        out_edges.push(edges);
    }
    Ok(KnnGraph {
        k,
        out_edges,
        indegree,
    })
}

/// Per-point outlyingness for one pass of a detector.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlyingnessReport<T> {
    /// Point ids, aligned with `factors`.
    pub ids: Vec<usize>,
    pub factors: Vec<T>,
    /// Largest point-to-own-centroid distance. Zero for indegree scores.
    pub d_max: T,
    /// Ids with factor strictly above the threshold, ascending.
    pub removed_ids: Vec<usize>,
    /// 1-based pass number; 0 until a threshold is applied.
    pub iteration: usize,
}

impl<T: Scalar> OutlyingnessReport<T> {
    /// Fills `removed_ids` with every id whose factor exceeds `threshold`.
    pub fn apply_threshold(&mut self, threshold: T, iteration: usize) {
        let mut removed: Vec<usize> = self
            .ids
            .iter()
            .zip(&self.factors)
            .filter(|(_, &o)| o > threshold)
            .map(|(&id, _)| id)
            .collect();
        removed.sort_unstable();
        self.removed_ids = removed;
        self.iteration = iteration;
    }

    pub fn factor_of(&self, id: usize) -> Option<T> {
        self.ids
            .iter()
            .position(|&x| x == id)
            .map(|i| self.factors[i])
    }
}

/// Distance of every point to its nearest centroid, divided by the global
/// maximum of those distances. When that maximum is zero every factor is zero.
pub fn outlyingness<T: Scalar>(
    data: &DataSet<T>,
    centroids: &Centroids<T>,
) -> Result<OutlyingnessReport<T>> {
    if data.is_empty() {
        return Err(Error::Empty);
    }
    if data.dim() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: centroids.dim(),
        });
    }
    let dists: Vec<T> = data
        .points()
        .map(|p| centroids.nearest(p).1.sqrt())
        .collect();
    let d_max = dists.iter().copied().fold(T::zero(), T::max);
    let factors = if d_max > T::zero() {
        dists.iter().map(|&d| d / d_max).collect()
    } else {
        vec![T::zero(); dists.len()]
    };
    Ok(OutlyingnessReport {
        ids: data.ids().to_vec(),
        factors,
        d_max,
        removed_ids: Vec::new(),
        iteration: 0,
    })
}

/// One removed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Removal<T> {
    pub iteration: usize,
    pub id: usize,
    pub factor: T,
}

/// Outcome of a detector run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierRunResult<T> {
    pub final_clustering: ClusteringResult<T>,
    /// Removals in the order they happened.
    pub all_removed: Vec<Removal<T>>,
    pub surviving: DataSet<T>,
    pub per_iteration: Vec<OutlyingnessReport<T>>,
    /// Set when a pass would have left fewer than `k` points; that pass is
    /// not applied.
    pub early_stop: bool,
}

impl<T: Scalar> OutlierRunResult<T> {
    pub fn removed_ids(&self) -> HashSet<usize> {
        self.all_removed.iter().map(|r| r.id).collect()
    }
}

/// Settings for ODIN followed by k-means.
#[derive(Debug, Clone, PartialEq)]
pub struct OdinConfig {
    pub knn_k: usize,
    /// Points with `1 / (indegree + 1)` above this are removed.
    pub threshold: f64,
    pub kmeans_k: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// Single pass of indegree-based removal, then multi-restart k-means on the
/// survivors.
pub fn odin<T: Scalar>(data: &DataSet<T>, cfg: &OdinConfig) -> Result<OutlierRunResult<T>> {
    if !(cfg.threshold > 0.0 && cfg.threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {} outside (0, 1]",
            cfg.threshold
        )));
    }
    let graph = build_knn_graph(data, cfg.knn_k)?;
    let factors: Vec<T> = graph
        .indegree
        .iter()
        .map(|&d| T::one() / T::of_usize(d + 1))
        .collect();
    let mut report = OutlyingnessReport {
        ids: data.ids().to_vec(),
        factors,
        d_max: T::zero(),
        removed_ids: Vec::new(),
        iteration: 0,
    };
    report.apply_threshold(T::of(cfg.threshold), 1);

    let removed: HashSet<usize> = report.removed_ids.iter().copied().collect();
    let surviving = data.remove_points(&removed)?;
    if surviving.is_empty() {
        return Err(Error::AllRemoved);
    }
    let final_clustering = kmeans_multistart(&surviving, cfg.kmeans_k, cfg.restarts, cfg.seed)?;
    let all_removed = report
        .removed_ids
        .iter()
        .map(|&id| Removal {
            iteration: 1,
            id,
            factor: report.factor_of(id).unwrap(),
        })
        .collect();
    Ok(OutlierRunResult {
        final_clustering,
        all_removed,
        surviving,
        per_iteration: vec![report],
        early_stop: false,
    })
}

/// Settings shared by the two iterative removal detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovalConfig {
    /// Number of removal passes.
    pub iterations: usize,
    /// Points with outlyingness strictly above this are removed.
    pub threshold: f64,
    pub seed: u64,
    /// Accept `threshold == 1`, which never removes anything.
    pub allow_threshold_one: bool,
}

impl Default for RemovalConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            threshold: 0.9,
            seed: 0,
            allow_threshold_one: false,
        }
    }
}

impl RemovalConfig {
    pub fn validate(&self) -> Result<()> {
        let upper_ok = self.threshold < 1.0 || (self.allow_threshold_one && self.threshold == 1.0);
        if !(self.threshold > 0.0 && upper_ok) {
            return Err(Error::InvalidParameter(format!(
                "threshold {} must lie in (0, 1){}",
                self.threshold,
                if self.allow_threshold_one {
                    " or equal 1"
                } else {
                    ""
                }
            )));
        }
        Ok(())
    }
}

fn iterative_removal<T: Scalar>(
    data: &DataSet<T>,
    k: usize,
    initial: ClusteringResult<T>,
    cfg: &RemovalConfig,
    mut refine: impl FnMut(&DataSet<T>, &Centroids<T>) -> Result<ClusteringResult<T>>,
) -> Result<OutlierRunResult<T>> {
    let threshold = T::of(cfg.threshold);
    let mut clustering = initial;
    let mut surviving = data.clone();
    let mut all_removed = Vec::new();
    let mut per_iteration = Vec::with_capacity(cfg.iterations);
    let mut early_stop = false;

    for iteration in 1..=cfg.iterations {
        let mut report = outlyingness(&surviving, &clustering.centroids)?;
        report.apply_threshold(threshold, iteration);
        if surviving.len() - report.removed_ids.len() < k {
            early_stop = true;
            break;
        }
        let removed: HashSet<usize> = report.removed_ids.iter().copied().collect();
        surviving = surviving.remove_points(&removed)?;
        all_removed.extend(report.removed_ids.iter().map(|&id| Removal {
            iteration,
            id,
            factor: report.factor_of(id).unwrap(),
        }));
        per_iteration.push(report);
        clustering = refine(&surviving, &clustering.centroids)?;
    }

    Ok(OutlierRunResult {
        final_clustering: clustering,
        all_removed,
        surviving,
        per_iteration,
        early_stop,
    })
}

/// Outlier removal clustering: multi-restart k-means, then `iterations`
/// passes of thresholded removal each followed by Lloyd warm-started from
/// the previous centers.
pub fn orc<T: Scalar>(
    data: &DataSet<T>,
    k: usize,
    cfg: &RemovalConfig,
    restarts: usize,
) -> Result<OutlierRunResult<T>> {
    cfg.validate()?;
    let initial = kmeans_multistart(data, k, restarts, cfg.seed)?;
    iterative_removal(data, k, initial, cfg, |x, c| {
        lloyd(x, c, DEFAULT_MAX_ITERS, T::of(DEFAULT_TOL))
    })
}

/// Improved genetic k-means, then `iterations` passes of thresholded removal
/// each followed by genetic k-means at the current `k`, warm-started from
/// the previous centers.
///
/// `cfg.seed` drives the whole run; the seed inside `igk_cfg.ga` is ignored.
pub fn proposed<T: Scalar>(
    data: &DataSet<T>,
    igk_cfg: &IgkConfig,
    cfg: &RemovalConfig,
) -> Result<OutlierRunResult<T>> {
    cfg.validate()?;
    igk_cfg.validate()?;
    let k = igk_cfg.k;
    if k > data.len() {
        return Err(Error::TooFewPoints { k, n: data.len() });
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start_cfg = IgkConfig {
        ga: GaConfig {
            seed: seeds.next_u64(),
            ..igk_cfg.ga.clone()
        },
        ..igk_cfg.clone()
    };
    let initial = igk(data, &start_cfg)?;
    iterative_removal(data, k, initial, cfg, |x, c| {
        let ga = GaConfig {
            seed: seeds.next_u64(),
            ..igk_cfg.ga.clone()
        };
        genetic_kmeans(x, k, &ga, Some(c))
    })
}

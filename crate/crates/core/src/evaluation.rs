//! Scoring estimated centers against ground truth, and threshold sweeps.

use crate::dataset::{DataSet, GroundTruth};
use crate::error::{Error, Result};
use crate::genetic::{igk, IgkConfig};
use crate::kmeans::{kmeans_multistart, Centroids, ClusteringResult};
use crate::outlier::{odin, orc, proposed, OdinConfig, Removal, RemovalConfig};
use crate::scalar::{sq_dist, Scalar};

/// Optimal one-to-one pairing between estimated and true centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidMatch<T> {
    /// `(estimated index, true index)`, ascending by estimated index.
    pub pairing: Vec<(usize, usize)>,
    pub unmatched_estimated: Vec<usize>,
    pub unmatched_true: Vec<usize>,
    /// Sum of squared distances over the pairing, accumulated in pairing order.
    pub total_sq_dist: T,
}

/// Minimum-cost assignment of every row to a distinct column of a
/// `rows x cols` cost matrix with `rows <= cols`. Returns the column of
/// each row.
///
/// Shortest augmenting path formulation with row and column potentials,
/// O(rows^2 * cols).
pub fn min_cost_assignment<T: Scalar>(cost: &[Vec<T>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "assignment needs rows <= cols");

    // 1-based with a virtual column 0
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![T::infinity(); m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = T::infinity();
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of = vec![0; n];
    for j in 1..=m {
        if row_of[j] > 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

/// Pairs estimated with true centers to minimize the total squared distance.
pub fn match_centroids<T: Scalar>(
    estimated: &Centroids<T>,
    truth: &GroundTruth<T>,
) -> Result<CentroidMatch<T>> {
    let t = &truth.centroids;
    if estimated.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: estimated.dim(),
        });
    }
    let (ne, nt) = (estimated.k(), t.k());
    let pairing: Vec<(usize, usize)> = if ne <= nt {
        let cost: Vec<Vec<T>> = estimated
            .centers()
            .map(|e| t.centers().map(|c| sq_dist(e, c)).collect())
            .collect();
        min_cost_assignment(&cost).into_iter().enumerate().collect()
    } else {
        let cost: Vec<Vec<T>> = t
            .centers()
            .map(|c| estimated.centers().map(|e| sq_dist(e, c)).collect())
            .collect();
        let mut p: Vec<(usize, usize)> = min_cost_assignment(&cost)
            .into_iter()
            .enumerate()
            .map(|(ti, ei)| (ei, ti))
            .collect();
        p.sort_unstable();
        p
    };
    let total_sq_dist = pairing
        .iter()
        .map(|&(e, c)| sq_dist(estimated.center(e), t.center(c)))
        .sum();
    let unmatched_estimated = (0..ne)
        .filter(|e| !pairing.iter().any(|p| p.0 == *e))
        .collect();
    let unmatched_true = (0..nt)
        .filter(|c| !pairing.iter().any(|p| p.1 == *c))
        .collect();
    Ok(CentroidMatch {
        pairing,
        unmatched_estimated,
        unmatched_true,
        total_sq_dist,
    })
}

/// Mean squared distance over the optimal pairing.
pub fn centroid_mse<T: Scalar>(estimated: &Centroids<T>, truth: &GroundTruth<T>) -> Result<T> {
    let m = match_centroids(estimated, truth)?;
    Ok(m.total_sq_dist / T::of_usize(m.pairing.len()))
}

/// Bookkeeping for one detector run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalMetrics<T> {
    /// Centroid error against ground truth, when a truth set was supplied.
    pub mse: Option<T>,
    pub removed_count: usize,
    pub surviving_n: usize,
    pub jc_final: T,
    pub runtime_ms: u64,
    pub seed: u64,
    pub early_stop: bool,
}

/// A clustering method together with its settings.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    KMeans {
        k: usize,
        restarts: usize,
    },
    Igk(IgkConfig),
    Odin(OdinConfig),
    Orc {
        k: usize,
        restarts: usize,
        removal: RemovalConfig,
    },
    Proposed {
        igk: IgkConfig,
        removal: RemovalConfig,
    },
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::KMeans { .. } => "kmeans",
            Detector::Igk(_) => "igk",
            Detector::Odin(_) => "odin",
            Detector::Orc { .. } => "orc",
            Detector::Proposed { .. } => "proposed",
        }
    }

    /// Same detector with its seed replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut d = self.clone();
        match &mut d {
            Detector::KMeans { .. } => {}
            Detector::Igk(c) => c.ga.seed = seed,
            Detector::Odin(c) => c.seed = seed,
            Detector::Orc { removal, .. } | Detector::Proposed { removal, .. } => {
                removal.seed = seed
            }
        }
        d
    }

    /// Same detector with its removal threshold replaced. A threshold of
    /// exactly 1 is accepted for the iterative detectors.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        let mut d = self.clone();
        match &mut d {
            Detector::KMeans { .. } | Detector::Igk(_) => {}
            Detector::Odin(c) => c.threshold = threshold,
            Detector::Orc { removal, .. } | Detector::Proposed { removal, .. } => {
                removal.threshold = threshold;
                removal.allow_threshold_one = removal.allow_threshold_one || threshold == 1.0;
            }
        }
        d
    }
}

/// What a detector run produced, whatever the method.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutcome<T> {
    pub clustering: ClusteringResult<T>,
    pub removed: Vec<Removal<T>>,
    pub surviving_n: usize,
    pub early_stop: bool,
}

/// Runs `detector` with the given seed. The k-means baseline seeds its
/// restarts from `seed` directly.
pub fn run_detector<T: Scalar>(
    data: &DataSet<T>,
    detector: &Detector,
    seed: u64,
) -> Result<DetectorOutcome<T>> {
    let plain = |clustering: ClusteringResult<T>| DetectorOutcome {
        clustering,
        removed: Vec::new(),
        surviving_n: data.len(),
        early_stop: false,
    };
    let outcome = match detector.with_seed(seed) {
        Detector::KMeans { k, restarts } => plain(kmeans_multistart(data, k, restarts, seed)?),
        Detector::Igk(cfg) => plain(igk(data, &cfg)?),
        Detector::Odin(cfg) => odin(data, &cfg)?.into(),
        Detector::Orc {
            k,
            restarts,
            removal,
        } => orc(data, k, &removal, restarts)?.into(),
        Detector::Proposed { igk, removal } => proposed(data, &igk, &removal)?.into(),
    };
    Ok(outcome)
}

impl<T: Scalar> From<crate::outlier::OutlierRunResult<T>> for DetectorOutcome<T> {
    fn from(r: crate::outlier::OutlierRunResult<T>) -> Self {
        Self {
            surviving_n: r.surviving.len(),
            clustering: r.final_clustering,
            removed: r.all_removed,
            early_stop: r.early_stop,
        }
    }
}

impl<T: Scalar> DetectorOutcome<T> {
    pub fn metrics(
        &self,
        truth: Option<&GroundTruth<T>>,
        seed: u64,
        runtime_ms: u64,
    ) -> Result<EvalMetrics<T>> {
        let mse = truth
            .map(|t| centroid_mse(&self.clustering.centroids, t))
            .transpose()?;
        Ok(EvalMetrics {
            mse,
            removed_count: self.removed.len(),
            surviving_n: self.surviving_n,
            jc_final: self.clustering.jc,
            runtime_ms,
            seed,
            early_stop: self.early_stop,
        })
    }
}

/// Middle value; mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One `(threshold, seed)` run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub seed: u64,
    pub mse: f64,
    pub removed_count: usize,
    /// Removals made in the first pass only.
    pub first_pass_removed: usize,
}

/// Per-threshold summary of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub median_mse: f64,
    pub median_removed: f64,
    pub cells: Vec<SweepCell>,
}

/// Runs `detector` at every threshold and seed and summarizes each threshold
/// by medians over seeds.
pub fn threshold_sweep<T: Scalar>(
    data: &DataSet<T>,
    truth: &GroundTruth<T>,
    detector: &Detector,
    thresholds: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one seed".into(),
        ));
    }
    if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "threshold {t} outside (0, 1]"
        )));
    }
    thresholds
        .iter()
        .map(|&threshold| {
            let det = detector.with_threshold(threshold);
            let cells = seeds
                .iter()
                .map(|&seed| {
                    let out = run_detector(data, &det, seed)?;
                    let mse = centroid_mse(&out.clustering.centroids, truth)?.as_f64();
                    let first_pass_removed =
                        out.removed.iter().filter(|r| r.iteration == 1).count();
                    Ok(SweepCell {
                        seed,
                        mse,
                        removed_count: out.removed.len(),
                        first_pass_removed,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mses: Vec<f64> = cells.iter().map(|c| c.mse).collect();
            let removed: Vec<f64> = cells.iter().map(|c| c.removed_count as f64).collect();
            Ok(SweepRow {
                threshold,
                median_mse: median(&mses),
                median_removed: median(&removed),
                cells,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(rows: &[[f64; 2]]) -> Centroids<f64> {
        Centroids::from_rows(rows).unwrap()
    }

    fn gt(rows: &[[f64; 2]]) -> GroundTruth<f64> {
        GroundTruth {
            centroids: cs(rows),
        }
    }

    #[test]
    fn identity_match_is_free() {
        let t = gt(&[[0., 0.], [5., 5.], [9., 1.]]);
        let e = cs(&[[9., 1.], [0., 0.], [5., 5.]]);
        let m = match_centroids(&e, &t).unwrap();
        assert_eq!(m.total_sq_dist, 0.0);
        assert_eq!(m.pairing, vec![(0, 2), (1, 0), (2, 1)]);
    }

    #[test]
    fn two_pair_example() {
        let e = cs(&[[0., 0.], [10., 0.]]);
        let t = gt(&[[10., 0.], [0., 1.]]);
        let m = match_centroids(&e, &t).unwrap();
        assert_eq!(m.pairing, vec![(0, 1), (1, 0)]);
        assert_eq!(m.total_sq_dist, 1.0);
        assert_eq!(centroid_mse(&e, &t).unwrap(), 0.5);
    }

    #[test]
    fn rectangular_matches() {
        let e = cs(&[[0., 0.], [10., 0.], [50., 50.]]);
        let t = gt(&[[10., 1.], [1., 0.]]);
        let m = match_centroids(&e, &t).unwrap();
        assert_eq!(m.pairing, vec![(0, 1), (1, 0)]);
        assert_eq!(m.unmatched_estimated, vec![2]);
        assert!(m.unmatched_true.is_empty());

        let m = match_centroids(&cs(&[[10., 0.]]), &t).unwrap();
        assert_eq!(m.pairing, vec![(0, 0)]);
        assert_eq!(m.unmatched_true, vec![1]);
    }

    #[test]
    fn dimension_mismatch() {
        let t = GroundTruth {
            centroids: Centroids::from_rows(&[[0.0f64, 0.0, 0.0]]).unwrap(),
        };
        assert!(match_centroids(&cs(&[[0., 0.]]), &t).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }
}

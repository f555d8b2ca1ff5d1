//! Nearest-centroid assignment, mean update, Lloyd iteration and
//! multi-restart k-means.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::scalar::{dist, sq_dist, Scalar};

/// Default cap on Lloyd iterations.
pub const DEFAULT_MAX_ITERS: usize = 100;
/// Default convergence tolerance on the largest center shift.
pub const DEFAULT_TOL: f64 = 1e-6;

/// A codebook: `k` centers of a common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> Centroids<T> {
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty)?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            coords.extend_from_slice(r);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(
                "centroid buffer does not hold whole centers".into(),
            ));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite centroid coordinate".into(),
            ));
        }
        Ok(Self { dim, coords })
    }

    /// Copies the points at `positions` of `data`.
    pub fn from_positions(data: &DataSet<T>, positions: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(positions.len() * data.dim());
        for &i in positions {
            coords.extend_from_slice(data.point(i));
        }
        Self {
            dim: data.dim(),
            coords,
        }
    }

    pub fn k(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn center(&self, j: usize) -> &[T] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    #[inline]
    pub fn center_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.centers().map(<[T]>::to_vec).collect()
    }

    /// Index and squared distance of the center nearest to `p`; ties go to
    /// the lowest index.
    #[inline]
    pub fn nearest(&self, p: &[T]) -> (usize, T) {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (j, c) in self.centers().enumerate() {
            let d = sq_dist(p, c);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        (best, best_d)
    }

    /// Largest Euclidean displacement between matching centers.
    pub fn max_shift(&self, other: &Self) -> T {
        self.centers()
            .zip(other.centers())
            .map(|(a, b)| dist(a, b))
            .fold(T::zero(), T::max)
    }

    pub(crate) fn remove_center(&mut self, j: usize) {
        self.coords.drain(j * self.dim..(j + 1) * self.dim);
    }
}

/// Cluster label of every point, aligned with dataset positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self> {
        let mut sizes = vec![0; k];
        for &l in &labels {
            if l >= k {
                return Err(Error::InvalidParameter(format!(
                    "label {l} out of range for {k} clusters"
                )));
            }
            sizes[l] += 1;
        }
        Ok(Self { labels, sizes })
    }

    /// Label of the point at position `i`.
    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label keyed by point id.
    pub fn label_of<T: Scalar>(&self, data: &DataSet<T>, id: usize) -> Option<usize> {
        data.ids()
            .iter()
            .position(|&x| x == id)
            .map(|i| self.labels[i])
    }

    fn relabel(&mut self, i: usize, to: usize) {
        let from = self.labels[i];
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        self.labels[i] = to;
    }
}

/// Output of a clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult<T> {
    pub centroids: Centroids<T>,
    pub partition: Partition,
    /// Sum of squared distances of points to their assigned centers.
    pub jc: T,
    pub iterations_run: usize,
}

impl<T: Scalar> ClusteringResult<T> {
    /// Assigns every point to its nearest center and scores the result.
    pub fn evaluate(
        data: &DataSet<T>,
        centroids: Centroids<T>,
        iterations_run: usize,
    ) -> Result<Self> {
        let partition = assign(data, &centroids)?;
        let jc = squared_error(data, &centroids, &partition);
        Ok(Self {
            centroids,
            partition,
            jc,
            iterations_run,
        })
    }

    pub fn k(&self) -> usize {
        self.centroids.k()
    }
}

fn check_dims<T: Scalar>(data: &DataSet<T>, centroids: &Centroids<T>) -> Result<()> {
    if data.dim() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: centroids.dim(),
        });
    }
    Ok(())
}

/// Labels every point with its nearest center (lowest index on ties).
pub fn assign<T: Scalar>(data: &DataSet<T>, centroids: &Centroids<T>) -> Result<Partition> {
    check_dims(data, centroids)?;
    let k = centroids.k();
    let mut sizes = vec![0; k];
    let labels = data
        .points()
        .map(|p| {
            let (j, _) = centroids.nearest(p);
            sizes[j] += 1;
            j
        })
        .collect();
    Ok(Partition { labels, sizes })
}

/// Replaces every center with the mean of its members.
///
/// A cluster left empty is reseeded at the point farthest from its own
/// (freshly updated) center, taken from a cluster with at least two members;
/// that point is relabeled into the empty cluster. The possibly relabeled
/// partition is returned alongside the centers.
pub fn update_centroids<T: Scalar>(
    data: &DataSet<T>,
    mut partition: Partition,
    previous: &Centroids<T>,
) -> (Centroids<T>, Partition) {
    let k = previous.k();
    let dim = data.dim();
    let mut sums = vec![T::zero(); k * dim];
    for (i, p) in data.points().enumerate() {
        let l = partition.labels[i];
        for (s, &v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut centers = previous.clone();
    for j in 0..k {
        let n = partition.sizes[j];
        if n > 0 {
            let inv = T::of_usize(n);
            for (c, &s) in centers
                .center_mut(j)
                .iter_mut()
                .zip(&sums[j * dim..(j + 1) * dim])
            {
                *c = s / inv;
            }
        }
    }

    for j in 0..k {
        if partition.sizes[j] > 0 {
            continue;
        }
        let mut far: Option<(usize, T)> = None;
        for (i, p) in data.points().enumerate() {
            let l = partition.labels[i];
            if partition.sizes[l] < 2 {
                continue;
            }
            let d = sq_dist(p, centers.center(l));
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        if let Some((i, _)) = far {
            centers.center_mut(j).copy_from_slice(data.point(i));
            partition.relabel(i, j);
        }
    }
    (centers, partition)
}

/// Sum over points of the squared distance to their assigned center.
pub fn squared_error<T: Scalar>(
    data: &DataSet<T>,
    centroids: &Centroids<T>,
    partition: &Partition,
) -> T {
    data.points()
        .zip(partition.labels())
        .map(|(p, &l)| sq_dist(p, centroids.center(l)))
        .sum()
}

/// One assign-then-update step from `centers`.
pub fn lloyd_step<T: Scalar>(data: &DataSet<T>, centers: &Centroids<T>) -> Result<Centroids<T>> {
    let partition = assign(data, centers)?;
    Ok(update_centroids(data, partition, centers).0)
}

/// Lloyd's algorithm from `init`, stopping when no center moves more than
/// `tol` or after `max_iters` update steps.
pub fn lloyd<T: Scalar>(
    data: &DataSet<T>,
    init: &Centroids<T>,
    max_iters: usize,
    tol: T,
) -> Result<ClusteringResult<T>> {
    lloyd_with_history(data, init, max_iters, tol).map(|(r, _)| r)
}

/// As [`lloyd`], also returning the criterion before the first step and
/// after every step.
pub fn lloyd_with_history<T: Scalar>(
    data: &DataSet<T>,
    init: &Centroids<T>,
    max_iters: usize,
    tol: T,
) -> Result<(ClusteringResult<T>, Vec<T>)> {
    if data.is_empty() {
        return Err(Error::Empty);
    }
    let mut centers = init.clone();
    let mut partition = assign(data, &centers)?;
    let mut history = vec![squared_error(data, &centers, &partition)];
    let mut iterations = 0;
    while iterations < max_iters {
        let (next, _) = update_centroids(data, partition, &centers);
        let shift = centers.max_shift(&next);
        centers = next;
        partition = assign(data, &centers)?;
        history.push(squared_error(data, &centers, &partition));
        iterations += 1;
        if shift <= tol {
            break;
        }
    }
    let jc = *history.last().unwrap();
    Ok((
        ClusteringResult {
            centroids: centers,
            partition,
            jc,
            iterations_run: iterations,
        },
        history,
    ))
}

/// `k` distinct data points chosen uniformly at random.
pub fn random_init<T: Scalar, R: Rng + ?Sized>(
    data: &DataSet<T>,
    k: usize,
    rng: &mut R,
) -> Result<Centroids<T>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if k > data.len() {
        return Err(Error::TooFewPoints { k, n: data.len() });
    }
    let picked = index::sample(rng, data.len(), k).into_vec();
    Ok(Centroids::from_positions(data, &picked))
}

/// Iteration limits for Lloyd runs nested inside other algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydParams {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LloydParams {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
        }
    }
}

/// Best-of-`restarts` k-means with default Lloyd limits.
pub fn kmeans_multistart<T: Scalar>(
    data: &DataSet<T>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusteringResult<T>> {
    kmeans_multistart_with(data, k, restarts, seed, LloydParams::default())
}

/// Runs Lloyd from `restarts` random initializations drawn from one seeded
/// stream and keeps the lowest criterion (earliest restart on ties).
pub fn kmeans_multistart_with<T: Scalar>(
    data: &DataSet<T>,
    k: usize,
    restarts: usize,
    seed: u64,
    params: LloydParams,
) -> Result<ClusteringResult<T>> {
    if restarts == 0 {
        return Err(Error::InvalidParameter(
            "restarts must be at least 1".into(),
        ));
    }
    if k > data.len() {
        return Err(Error::TooFewPoints { k, n: data.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<ClusteringResult<T>> = None;
    for _ in 0..restarts {
        let init = random_init(data, k, &mut rng)?;
        let run = lloyd(data, &init, params.max_iters, T::of(params.tol))?;
        if best.as_ref().is_none_or(|b| run.jc < b.jc) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

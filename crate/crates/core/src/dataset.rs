//! Point sets, ground-truth centroids, the synthetic generator and the plain
//! text point format.
//!
//! The text format is one point per line with whitespace-separated decimal
//! coordinates. Blank lines are skipped. The writer separates coordinates with
//! a single space and prints every value with its shortest round-trip
//! representation.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kmeans::Centroids;
use crate::scalar::Scalar;

/// An ordered collection of equal-dimension points, each carrying a stable id.
///
/// Ids are assigned `0..N` on construction and survive every removal, so a
/// point can always be traced back to its row in the original file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet<T> {
    dim: usize,
    coords: Vec<T>,
    ids: Vec<usize>,
}

impl<T: Scalar> DataSet<T> {
    /// Builds a dataset from rows; ids are the row positions.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty)?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "points need at least one coordinate".into(),
            ));
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coordinate".into()));
            }
            coords.extend_from_slice(row);
        }
        Ok(Self {
            dim,
            coords,
            ids: (0..rows.len()).collect(),
        })
    }

    /// Builds a dataset from a flat row-major buffer.
    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "flat buffer of {} values does not hold whole {dim}-d points",
                coords.len()
            )));
        }
        let n = coords.len() / dim;
        Ok(Self {
            dim,
            coords,
            ids: (0..n).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of the point at position `i` (not id `i`).
    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Id of the point at position `i`.
    #[inline]
    pub fn id(&self, i: usize) -> usize {
        self.ids[i]
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// `(id, coordinates)` pairs in dataset order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[T])> + '_ {
        self.ids.iter().copied().zip(self.points())
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.points().map(<[T]>::to_vec).collect()
    }

    /// Per-axis `(min, max)` over all points.
    pub fn bounding_box(&self) -> Vec<(T, T)> {
        let mut bounds = vec![(T::infinity(), T::neg_infinity()); self.dim];
        for p in self.points() {
            for (b, &v) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        bounds
    }

    /// Length of the bounding-box diagonal; zero for an empty set.
    pub fn bbox_diagonal(&self) -> T {
        if self.is_empty() {
            return T::zero();
        }
        self.bounding_box()
            .into_iter()
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<T>()
            .sqrt()
    }

    /// Keeps the points at the given positions, in the given order.
    pub fn select_positions(&self, positions: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(positions.len() * self.dim);
        let mut ids = Vec::with_capacity(positions.len());
        for &i in positions {
            coords.extend_from_slice(self.point(i));
            ids.push(self.ids[i]);
        }
        Self {
            dim: self.dim,
            coords,
            ids,
        }
    }

    /// Returns the dataset without the points whose ids are in `ids`.
    /// Survivors keep their ids and relative order.
    pub fn remove_points(&self, ids: &HashSet<usize>) -> Result<Self> {
        if !ids.is_empty() {
            let present: HashSet<usize> = self.ids.iter().copied().collect();
            // report the smallest unknown id so the error is reproducible
            if let Some(&bad) = ids.iter().filter(|id| !present.contains(id)).min() {
                return Err(Error::UnknownId(bad));
            }
        }
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| !ids.contains(&self.ids[i]))
            .collect();
        Ok(self.select_positions(&keep))
    }

    /// Draws `count_j` independent subsamples of `ceil(fraction * N)` points
    /// each, without replacement inside a subsample. Points inside a
    /// subsample keep their dataset order.
    pub fn subsample(&self, count_j: usize, fraction: f64, seed: u64) -> Result<Vec<Self>> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "subsample fraction {fraction} outside (0, 1]"
            )));
        }
        if count_j == 0 {
            return Err(Error::InvalidParameter(
                "subsample count must be positive".into(),
            ));
        }
        let n = self.len();
        let size = subsample_size(n, fraction);
        if size == 0 {
            return Err(Error::Empty);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count_j)
            .map(|_| {
                let mut picked = index::sample(&mut rng, n, size).into_vec();
                picked.sort_unstable();
                self.select_positions(&picked)
            })
            .collect())
    }

    /// Serializes in the plain text point format.
    pub fn to_text(&self) -> String {
        rows_to_text(self.points())
    }
}

/// Number of points a subsample of `fraction` holds.
pub fn subsample_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).ceil() as usize).min(n)
}

/// True generative centers of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub centroids: Centroids<T>,
}

impl<T: Scalar> GroundTruth<T> {
    pub fn len(&self) -> usize {
        self.centroids.k()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.k() == 0
    }

    pub fn dim(&self) -> usize {
        self.centroids.dim()
    }
}

/// Parameters of the synthetic Gaussian-blob generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub num_clusters: usize,
    pub points_per_cluster: usize,
    pub dimension: usize,
    /// Per-axis standard deviation of every blob.
    pub spread: f64,
    /// Centers are drawn uniformly in `[box_lo, box_hi]` on every axis.
    pub box_lo: f64,
    pub box_hi: f64,
    /// Outliers appended: `floor(outlier_fraction * inliers)`.
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            num_clusters: 3,
            points_per_cluster: 100,
            dimension: 2,
            spread: 1.0,
            box_lo: 0.0,
            box_hi: 100.0,
            outlier_fraction: 0.0,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.num_clusters == 0 || self.points_per_cluster == 0 || self.dimension == 0 {
            return bad("cluster count, cluster size and dimension must be positive");
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return bad("spread must be positive");
        }
        if !(self.box_lo.is_finite() && self.box_hi.is_finite() && self.box_lo < self.box_hi) {
            return bad("center box must be a finite, non-empty interval");
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return bad("outlier fraction must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn inlier_count(&self) -> usize {
        self.num_clusters * self.points_per_cluster
    }

    pub fn outlier_count(&self) -> usize {
        (self.outlier_fraction * self.inlier_count() as f64).floor() as usize
    }

    /// Interval outliers are drawn from: the center box widened by half its
    /// width on each side, so its total width is doubled.
    pub fn outlier_box(&self) -> (f64, f64) {
        let half = 0.5 * (self.box_hi - self.box_lo);
        (self.box_lo - half, self.box_hi + half)
    }
}

/// Draws blobs around uniformly placed centers, then appends uniform
/// outliers. Inliers come first (cluster by cluster), so outlier ids are
/// `inlier_count()..N`.
pub fn generate<T: Scalar>(spec: &GenSpec) -> Result<(DataSet<T>, GroundTruth<T>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.dimension;

    let mut centers = Vec::with_capacity(spec.num_clusters * d);
    for _ in 0..spec.num_clusters * d {
        centers.push(rng.random_range(spec.box_lo..spec.box_hi));
    }

    let n = spec.inlier_count() + spec.outlier_count();
    let mut coords = Vec::with_capacity(n * d);
    for c in centers.chunks_exact(d) {
        for _ in 0..spec.points_per_cluster {
            for &mu in c {
                let z: f64 = StandardNormal.sample(&mut rng);
                coords.push(T::of(mu + spec.spread * z));
            }
        }
    }
    let (lo, hi) = spec.outlier_box();
    for _ in 0..spec.outlier_count() * d {
        coords.push(T::of(rng.random_range(lo..hi)));
    }

    let data = DataSet::from_flat(d, coords)?;
    let truth = GroundTruth {
        centroids: Centroids::from_flat(d, centers.into_iter().map(T::of).collect())?,
    };
    Ok((data, truth))
}

/// Parses the plain text point format. Every row must have the same arity.
pub fn parse_points<T: Scalar>(text: &str) -> Result<Vec<Vec<T>>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let mut row = Vec::new();
        for token in line.split_whitespace() {
            let v: T = token.parse().map_err(|_| Error::BadNumber {
                line: line_no,
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    line: line_no,
                    token: token.to_string(),
                });
            }
            row.push(v);
        }
        if row.is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::RaggedRow {
                    line: line_no,
                    expected: first.len(),
                    found: row.len(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty);
    }
    Ok(rows)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a dataset file; one point per non-blank line, in file order.
pub fn load_dataset<T: Scalar>(path: impl AsRef<Path>) -> Result<DataSet<T>> {
    let rows = parse_points::<T>(&read_text(path.as_ref())?)?;
    DataSet::from_rows(&rows)
}

/// Reads a centroid file and checks its dimension.
pub fn load_ground_truth<T: Scalar>(
    path: impl AsRef<Path>,
    expected_dim: usize,
) -> Result<GroundTruth<T>> {
    let rows = parse_points::<T>(&read_text(path.as_ref())?)?;
    let found = rows[0].len();
    if found != expected_dim {
        return Err(Error::DimensionMismatch {
            expected: expected_dim,
            found,
        });
    }
    Ok(GroundTruth {
        centroids: Centroids::from_rows(&rows)?,
    })
}

/// Formats rows in the plain text point format.
pub fn rows_to_text<'a, T: Scalar>(rows: impl IntoIterator<Item = &'a [T]>) -> String {
    let mut out = String::new();
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Writes rows to `path` in the plain text point format.
pub fn write_points<'a, T: Scalar>(
    path: impl AsRef<Path>,
    rows: impl IntoIterator<Item = &'a [T]>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, rows_to_text(rows)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

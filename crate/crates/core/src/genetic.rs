//! Genetic k-means over real-coded centroid chromosomes, and the improved
//! genetic k-means pipeline built on it: subsample seeding, seed selection by
//! full-data squared error, a full-data run at `k_prime`, then merging of the
//! closest clusters down to `k`.

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{subsample_size, DataSet};
use crate::error::{Error, Result};
use crate::kmeans::{
    assign, lloyd_step, random_init, squared_error, Centroids, ClusteringResult, Partition,
};
use crate::scalar::{sq_dist, Scalar};

/// Genetic algorithm hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Probability that any single center is mutated.
    pub mutation_prob: f64,
    /// Gaussian mutation step as a fraction of the bounding-box diagonal.
    pub mutation_scale: f64,
    /// Best chromosomes copied unchanged into the next generation.
    pub elitism: usize,
    pub tournament_size: usize,
    /// Stop after this many generations without improvement.
    pub stall_generations: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 50,
            mutation_prob: 0.05,
            mutation_scale: 0.02,
            elitism: 1,
            tournament_size: 2,
            stall_generations: 15,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.population_size == 0 || self.generations == 0 || self.stall_generations == 0 {
            return bad("population size, generations and stall limit must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad(format!(
                "mutation probability {} outside [0, 1]",
                self.mutation_prob
            ));
        }
        if !(self.mutation_scale > 0.0 && self.mutation_scale.is_finite()) {
            return bad("mutation scale must be positive".into());
        }
        if self.elitism >= self.population_size {
            return bad(format!(
                "elitism {} must be below population size {}",
                self.elitism, self.population_size
            ));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament size {} must lie in 1..={}",
                self.tournament_size, self.population_size
            ));
        }
        Ok(())
    }
}

/// A candidate codebook and its score.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome<T> {
    pub centers: Centroids<T>,
    /// `1 / (1 + jc)`.
    pub fitness: T,
    pub jc: T,
}

impl<T: Scalar> Chromosome<T> {
    pub fn evaluate(data: &DataSet<T>, centers: Centroids<T>) -> Result<Self> {
        let partition = assign(data, &centers)?;
        let jc = squared_error(data, &centers, &partition);
        Ok(Self {
            centers,
            fitness: T::one() / (T::one() + jc),
            jc,
        })
    }
}

/// Best-so-far criterion after initialization and after every generation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaTrace<T> {
    pub best_jc: Vec<T>,
}

/// Runs genetic k-means and returns the best chromosome found.
pub fn genetic_kmeans<T: Scalar>(
    data: &DataSet<T>,
    k: usize,
    cfg: &GaConfig,
    warm_start: Option<&Centroids<T>>,
) -> Result<ClusteringResult<T>> {
    genetic_kmeans_traced(data, k, cfg, warm_start).map(|(r, _)| r)
}

/// Index of the chromosome with the lowest criterion, earliest on ties.
fn argmin<T: Scalar>(pop: &[Chromosome<T>]) -> usize {
    let mut best = 0;
    for (i, c) in pop.iter().enumerate().skip(1) {
        if c.jc < pop[best].jc {
            best = i;
        }
    }
    best
}

fn tournament<T: Scalar, R: Rng + ?Sized>(
    pop: &[Chromosome<T>],
    size: usize,
    rng: &mut R,
) -> usize {
    let mut entrants = index::sample(rng, pop.len(), size).into_vec();
    entrants.sort_unstable();
    entrants
        .into_iter()
        .reduce(|a, b| if pop[b].jc < pop[a].jc { b } else { a })
        .unwrap()
}

fn mutate<T: Scalar, R: Rng + ?Sized>(
    centers: &mut Centroids<T>,
    data: &DataSet<T>,
    cfg: &GaConfig,
    sigma: f64,
    rng: &mut R,
) {
    for j in 0..centers.k() {
        if rng.random::<f64>() >= cfg.mutation_prob {
            continue;
        }
        if rng.random_bool(0.5) {
            for c in centers.center_mut(j) {
                let z: f64 = StandardNormal.sample(rng);
                *c += T::of(sigma * z);
            }
        } else {
            let i = rng.random_range(0..data.len());
            centers.center_mut(j).copy_from_slice(data.point(i));
        }
    }
}

/// As [`genetic_kmeans`], also returning the best-so-far trajectory.
///
/// Each generation keeps the `elitism` best chromosomes unchanged and fills
/// the rest of the population with tournament winners that are mutated and
/// then improved by a single Lloyd step.
pub fn genetic_kmeans_traced<T: Scalar>(
    data: &DataSet<T>,
    k: usize,
    cfg: &GaConfig,
    warm_start: Option<&Centroids<T>>,
) -> Result<(ClusteringResult<T>, GaTrace<T>)> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if k > data.len() {
        return Err(Error::TooFewPoints { k, n: data.len() });
    }
    if let Some(w) = warm_start {
        if w.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                found: w.dim(),
            });
        }
        if w.k() != k {
            return Err(Error::InvalidParameter(format!(
                "warm start has {} centers, expected {k}",
                w.k()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sigma = cfg.mutation_scale * data.bbox_diagonal().as_f64();

    let mut pop = Vec::with_capacity(cfg.population_size);
    if let Some(w) = warm_start {
        pop.push(Chromosome::evaluate(data, w.clone())?);
    }
    while pop.len() < cfg.population_size {
        let centers = random_init(data, k, &mut rng)?;
        pop.push(Chromosome::evaluate(data, centers)?);
    }

    let mut best = pop[argmin(&pop)].clone();
    let mut trace = vec![best.jc];
    let mut stall = 0;
    let mut generations = 0;

    while generations < cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| pop[a].jc.partial_cmp(&pop[b].jc).unwrap().then(a.cmp(&b)));

        let mut next: Vec<Chromosome<T>> = order[..cfg.elitism]
            .iter()
            .map(|&i| pop[i].clone())
            .collect();
        while next.len() < cfg.population_size {
            let parent = tournament(&pop, cfg.tournament_size, &mut rng);
            let mut centers = pop[parent].centers.clone();
            mutate(&mut centers, data, cfg, sigma, &mut rng);
            let centers = lloyd_step(data, &centers)?;
            next.push(Chromosome::evaluate(data, centers)?);
        }
        pop = next;
        generations += 1;

        let gen_best = &pop[argmin(&pop)];
        if gen_best.jc < best.jc {
            stall = 0;
        } else {
            stall += 1;
        }
        if gen_best.jc <= best.jc {
            best = gen_best.clone();
        }
        trace.push(best.jc);
        if stall >= cfg.stall_generations {
            break;
        }
    }

    let result = ClusteringResult::evaluate(data, best.centers, generations)?;
    Ok((result, GaTrace { best_jc: trace }))
}

/// Improved genetic k-means settings.
#[derive(Debug, Clone, PartialEq)]
pub struct IgkConfig {
    /// Final number of clusters.
    pub k: usize,
    /// Intermediate number of clusters before merging.
    pub k_prime: usize,
    pub num_subsamples: usize,
    pub subsample_fraction: f64,
    pub ga: GaConfig,
}

impl IgkConfig {
    /// Defaults for a target of `k` clusters: `k_prime = 2k`, five
    /// subsamples of 10% each.
    pub fn for_k(k: usize) -> Self {
        Self {
            k,
            k_prime: 2 * k,
            num_subsamples: 5,
            subsample_fraction: 0.1,
            ga: GaConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ga.validate()?;
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if self.k_prime < self.k {
            return Err(Error::InvalidParameter(format!(
                "k_prime ({}) must not be below k ({})",
                self.k_prime, self.k
            )));
        }
        if self.num_subsamples == 0 {
            return Err(Error::InvalidParameter(
                "need at least one subsample".into(),
            ));
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "subsample fraction {} outside (0, 1]",
                self.subsample_fraction
            )));
        }
        Ok(())
    }
}

/// Intermediate products of an [`igk`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct IgkTrace<T> {
    /// Centers found on each subsample.
    pub candidates: Vec<Centroids<T>>,
    /// Squared error of each candidate evaluated on the full dataset.
    pub candidate_jc: Vec<T>,
    pub selected: usize,
    /// Result of the full-data run at `k_prime`, before merging.
    pub before_merge: ClusteringResult<T>,
    pub merges: usize,
}

/// Runs the improved genetic k-means pipeline and returns `k` clusters.
pub fn igk<T: Scalar>(data: &DataSet<T>, cfg: &IgkConfig) -> Result<ClusteringResult<T>> {
    igk_traced(data, cfg).map(|(r, _)| r)
}

pub fn igk_traced<T: Scalar>(
    data: &DataSet<T>,
    cfg: &IgkConfig,
) -> Result<(ClusteringResult<T>, IgkTrace<T>)> {
    cfg.validate()?;
    let n_sub = subsample_size(data.len(), cfg.subsample_fraction);
    if cfg.k_prime > n_sub {
        return Err(Error::TooFewPoints {
            k: cfg.k_prime,
            n: n_sub,
        });
    }

    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.ga.seed);
    let subsamples =
        data.subsample(cfg.num_subsamples, cfg.subsample_fraction, seeds.next_u64())?;

    let mut candidates = Vec::with_capacity(subsamples.len());
    let mut candidate_jc = Vec::with_capacity(subsamples.len());
    for sub in &subsamples {
        let ga = GaConfig {
            seed: seeds.next_u64(),
            ..cfg.ga.clone()
        };
        let run = genetic_kmeans(sub, cfg.k_prime, &ga, None)?;
        let full = assign(data, &run.centroids)?;
        candidate_jc.push(squared_error(data, &run.centroids, &full));
        candidates.push(run.centroids);
    }
    let mut selected = 0;
    for (m, jc) in candidate_jc.iter().enumerate() {
        if *jc < candidate_jc[selected] {
            selected = m;
        }
    }

    let ga = GaConfig {
        seed: seeds.next_u64(),
        ..cfg.ga.clone()
    };
    let before_merge = genetic_kmeans(data, cfg.k_prime, &ga, Some(&candidates[selected]))?;

    let mut result = before_merge.clone();
    let mut merges = 0;
    while result.k() > cfg.k {
        result = merge_step(&result, data)?;
        merges += 1;
    }
    let result = ClusteringResult::evaluate(data, result.centroids, result.iterations_run)?;
    Ok((
        result,
        IgkTrace {
            candidates,
            candidate_jc,
            selected,
            before_merge,
            merges,
        },
    ))
}

/// Merges the two closest centers into their size-weighted mean.
///
/// Members of both clusters take the merged label; no other point is
/// reassigned. The closest pair is found by Euclidean distance between
/// centers, lexicographically smallest index pair on ties.
pub fn merge_step<T: Scalar>(
    result: &ClusteringResult<T>,
    data: &DataSet<T>,
) -> Result<ClusteringResult<T>> {
    let k = result.k();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "merging needs at least two clusters".into(),
        ));
    }
    if result.partition.len() != data.len() {
        return Err(Error::InvalidParameter(
            "partition does not cover the dataset".into(),
        ));
    }
    let c = &result.centroids;
    let (mut a, mut b, mut best) = (0, 1, T::infinity());
    for i in 0..k {
        for j in i + 1..k {
            let d = sq_dist(c.center(i), c.center(j));
            if d < best {
                (a, b, best) = (i, j, d);
            }
        }
    }

    let sizes = result.partition.sizes();
    let (na, nb) = (sizes[a], sizes[b]);
    let (wa, wb) = if na + nb == 0 {
        (T::one(), T::one())
    } else {
        (T::of_usize(na), T::of_usize(nb))
    };
    let mut centers = c.clone();
    let merged: Vec<T> = c
        .center(a)
        .iter()
        .zip(c.center(b))
        .map(|(&x, &y)| (wa * x + wb * y) / (wa + wb))
        .collect();
    centers.center_mut(a).copy_from_slice(&merged);
    centers.remove_center(b);

    let labels = result
        .partition
        .labels()
        .iter()
        .map(|&l| match l.cmp(&b) {
            std::cmp::Ordering::Less => l,
            std::cmp::Ordering::Equal => a,
            std::cmp::Ordering::Greater => l - 1,
        })
        .collect();
    let partition = Partition::from_labels(labels, k - 1)?;
    let jc = squared_error(data, &centers, &partition);
    Ok(ClusteringResult {
        centroids: centers,
        partition,
        jc,
        iterations_run: result.iterations_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans::lloyd;

    fn ds(rows: &[[f64; 2]]) -> DataSet<f64> {
        DataSet::from_rows(rows).unwrap()
    }

    fn clustering(
        data: &DataSet<f64>,
        centers: &[[f64; 2]],
        labels: Vec<usize>,
    ) -> ClusteringResult<f64> {
        let centroids = Centroids::from_rows(centers).unwrap();
        let partition = Partition::from_labels(labels, centers.len()).unwrap();
        let jc = squared_error(data, &centroids, &partition);
        ClusteringResult {
            centroids,
            partition,
            jc,
            iterations_run: 0,
        }
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig {
            elitism: 20,
            ..GaConfig::default()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            tournament_size: 21,
            ..GaConfig::default()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            mutation_prob: 1.5,
            ..GaConfig::default()
        }
        .validate()
        .is_err());
        let mut igk = IgkConfig::for_k(3);
        assert_eq!(igk.k_prime, 6);
        igk.k_prime = 2;
        assert!(igk.validate().is_err());
    }

    #[test]
    fn fitness_matches_jc() {
        let d = ds(&[[0., 0.], [2., 0.]]);
        let c = Chromosome::evaluate(&d, Centroids::from_rows(&[[0., 0.]]).unwrap()).unwrap();
        assert_eq!(c.jc, 4.0);
        assert_eq!(c.fitness, 0.2);
    }

    #[test]
    fn warm_start_at_optimum_is_kept() {
        let d = ds(&[[0., 0.], [2., 0.]]);
        let w = Centroids::from_rows(&[[1., 0.]]).unwrap();
        let r = genetic_kmeans(&d, 1, &GaConfig::default(), Some(&w)).unwrap();
        assert_eq!(r.jc, 2.0);
        assert_eq!(r.centroids, w);
    }

    #[test]
    fn single_chromosome_without_mutation_is_lloyd() {
        let d = ds(&[
            [0., 0.],
            [1., 0.],
            [4., 0.],
            [5., 1.],
            [9., 9.],
            [8., 9.],
            [3., 3.],
        ]);
        let init = Centroids::from_rows(&[[0., 0.], [1., 0.], [3., 3.]]).unwrap();
        let cfg = GaConfig {
            population_size: 1,
            elitism: 0,
            tournament_size: 1,
            mutation_prob: 0.0,
            generations: 4,
            stall_generations: 100,
            ..GaConfig::default()
        };
        let ga = genetic_kmeans(&d, 3, &cfg, Some(&init)).unwrap();
        let ll = lloyd(&d, &init, 4, -1.0).unwrap();
        assert_eq!(ga.centroids, ll.centroids);
        assert_eq!(ga.jc, ll.jc);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = ds(&[[0., 0.], [2., 0.]]);
        assert!(matches!(
            genetic_kmeans(&d, 3, &GaConfig::default(), None),
            Err(Error::TooFewPoints { .. })
        ));
        let w = Centroids::from_rows(&[[0., 0.], [1., 1.]]).unwrap();
        assert!(genetic_kmeans(&d, 1, &GaConfig::default(), Some(&w)).is_err());
    }

    #[test]
    fn merge_weighted_mean() {
        let d = ds(&[[0., 0.], [0., 0.], [2., 0.], [2., 0.], [100., 0.]]);
        let r = clustering(&d, &[[0., 0.], [2., 0.], [100., 0.]], vec![0, 0, 1, 1, 2]);
        let m = merge_step(&r, &d).unwrap();
        assert_eq!(m.centroids.to_rows(), vec![vec![1., 0.], vec![100., 0.]]);
        assert_eq!(m.partition.labels(), &[0, 0, 0, 0, 1]);
        assert_eq!(m.jc, 4.0);

        let d = ds(&[[0., 0.], [3., 0.], [3., 0.], [3., 0.]]);
        let r = clustering(&d, &[[0., 0.], [3., 0.]], vec![0, 1, 1, 1]);
        let m = merge_step(&r, &d).unwrap();
        assert_eq!(m.centroids.center(0), &[2.25, 0.]);
    }

    #[test]
    fn merge_tie_takes_first_pair() {
        let rows = [
            [0., 0.],
            [1., 0.],
            [10., 0.],
            [11., 0.],
            [20., 0.],
            [21., 0.],
        ];
        let d = ds(&rows);
        let r = clustering(&d, &rows, (0..6).collect());
        let m = merge_step(&r, &d).unwrap();
        assert_eq!(m.centroids.center(0), &[0.5, 0.]);
        assert_eq!(m.partition.labels(), &[0, 0, 1, 2, 3, 4]);

        let rows = [[0., 0.], [1., 0.], [2., 0.]];
        let d = ds(&rows);
        let r = clustering(&d, &rows, vec![0, 1, 2]);
        let m = merge_step(&r, &d).unwrap();
        assert_eq!(m.centroids.to_rows(), vec![vec![0.5, 0.], vec![2., 0.]]);
    }

    #[test]
    fn merge_needs_two_clusters() {
        let d = ds(&[[0., 0.]]);
        let r = clustering(&d, &[[0., 0.]], vec![0]);
        assert!(merge_step(&r, &d).is_err());
    }

    #[test]
    fn igk_degenerate_single_subsample() {
        let d = ds(&[
            [0., 0.],
            [1., 0.],
            [10., 10.],
            [11., 10.],
            [20., 0.],
            [21., 0.],
        ]);
        let cfg = IgkConfig {
            k: 3,
            k_prime: 3,
            num_subsamples: 1,
            subsample_fraction: 1.0,
            ga: GaConfig::default(),
        };
        let (r, trace) = igk_traced(&d, &cfg).unwrap();
        assert_eq!(trace.merges, 0);
        assert_eq!(r.k(), 3);
        assert_eq!(r.jc, 1.5);
    }

    #[test]
    fn igk_subsample_too_small() {
        let d = ds(&[[0., 0.], [1., 0.], [10., 10.], [11., 10.]]);
        let cfg = IgkConfig {
            k: 1,
            k_prime: 2,
            num_subsamples: 2,
            subsample_fraction: 0.25,
            ga: GaConfig::default(),
        };
        assert!(matches!(
            igk(&d, &cfg),
            Err(Error::TooFewPoints { k: 2, n: 1 })
        ));
    }
}

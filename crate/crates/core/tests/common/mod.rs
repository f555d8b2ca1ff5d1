#![allow(dead_code)]

use igk_core::{Centroids, DataSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

pub fn random_data(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> DataSet<f64> {
    DataSet::from_rows(&random_rows(rng, n, dim, 10.0)).unwrap()
}

pub fn random_centroids(rng: &mut ChaCha8Rng, k: usize, dim: usize) -> Centroids<f64> {
    Centroids::from_rows(&random_rows(rng, k, dim, 10.0)).unwrap()
}

/// Points on an integer grid so distance ties actually happen.
pub fn grid_data(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> DataSet<f64> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0..5) as f64).collect())
        .collect();
    DataSet::from_rows(&rows).unwrap()
}

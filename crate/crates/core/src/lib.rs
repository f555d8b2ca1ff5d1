//! Clustering with outlier removal built on improved genetic k-means.
//!
//! The algorithms are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiation.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod genetic;
pub mod kmeans;
pub mod outlier;
pub mod scalar;

pub use dataset::{
    generate, load_dataset, load_ground_truth, parse_points, subsample_size, write_points, DataSet,
    GenSpec, GroundTruth,
};
pub use error::{Error, Result};
pub use evaluation::{
    centroid_mse, match_centroids, run_detector, threshold_sweep, CentroidMatch, Detector,
    EvalMetrics,
};
pub use genetic::{
    genetic_kmeans, genetic_kmeans_traced, igk, igk_traced, merge_step, Chromosome, GaConfig,
    IgkConfig,
};
pub use kmeans::{
    assign, kmeans_multistart, lloyd, lloyd_with_history, random_init, squared_error,
    update_centroids, Centroids, ClusteringResult, Partition,
};
pub use outlier::{
    build_knn_graph, odin, orc, outlyingness, proposed, KnnGraph, OdinConfig, OutlierRunResult,
    OutlyingnessReport, RemovalConfig,
};
pub use scalar::{sq_dist, Scalar};

pub type DataSet64 = DataSet<f64>;
pub type DataSet32 = DataSet<f32>;
pub type Centroids64 = Centroids<f64>;
pub type Centroids32 = Centroids<f32>;
pub type GroundTruth64 = GroundTruth<f64>;
pub type ClusteringResult64 = ClusteringResult<f64>;
pub type ClusteringResult32 = ClusteringResult<f32>;
pub type OutlierRunResult64 = OutlierRunResult<f64>;

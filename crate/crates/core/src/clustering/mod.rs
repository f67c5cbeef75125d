//! K-means and Ward agglomerative clustering with silhouette-based model
//! selection.

mod agglomerative;
mod kmeans;
mod silhouette;

pub use agglomerative::{agglomerative_fit, AgglomerativeModel, Merge};
pub use kmeans::{
    kmeans_assign, kmeans_fit, kmeans_fit_with, KMeansModel, KMeansModelJson, KMeansParams,
    DEFAULT_MAX_ITER, DEFAULT_RESTARTS, DEFAULT_TOL,
};
pub use silhouette::{
    silhouette_score, silhouette_sweep, SilhouetteSweep, DEFAULT_K_MAX, DEFAULT_K_MIN,
};

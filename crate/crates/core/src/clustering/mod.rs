//! K-means over n-gram vectors and nearest-centroid lookup for new n-grams.

mod io;
mod kmeans;

pub use kmeans::{
    assign, assign_all, fit, inertia, initial_centroids, kmeans_fit, lloyd_from, minibatch_kmeans_fit, Assignment, Centroids, Init,
    KMeansConfig, KMeansFit, Variant,
};

//! Downstream applications of droplet vectors and the trajectory baselines
//! they are compared against.

mod abnormality;
mod baseline;
mod classify;
mod dtw;
mod kmeans;
mod metrics;
mod spectral;

pub use abnormality::{detect, fit_abnormality, AbnormalityModel, THRESHOLD_FACTOR};
pub use baseline::{ed_features, ED_POINTS};
pub use classify::{knn_classify, train_classifier, LinearOvRModel, SvmOptions, DEFAULT_KNN_K};
pub use dtw::{dtw_distance, dtw_matrix, kmedoids};
pub use kmeans::{kmeans, kmeans_with, Init, KMeansOptions, KMeansOutput};
pub use metrics::{auc, cluster_accuracy, confusion_matrix, detection_rates, max_weight_matching, roc_curve, DetectionRates};
pub use spectral::{euclidean_matrix, spectral_cluster, spectral_cluster_distances, spectral_embedding};

use serde::{Deserialize, Serialize};

/// Cluster assignment of a set of inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

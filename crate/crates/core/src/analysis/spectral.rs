use nalgebra::{DMatrix, SymmetricEigen};

use super::kmeans::{kmeans_with, Init, KMeansOptions};
use super::{sq_dist, ClusterResult};
use crate::error::{Error, Result};
use crate::par;

/// Pairwise Euclidean distances.
pub fn euclidean_matrix(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    par::map_indices(vectors.len(), |i| vectors.iter().map(|w| sq_dist(&vectors[i], w).sqrt()).collect())
}

/// Gaussian-affinity spectral clustering of vectors under Euclidean distance.
pub fn spectral_cluster(vectors: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterResult> {
    spectral_cluster_distances(&euclidean_matrix(vectors), k, seed)
}

/// Spectral clustering from a precomputed symmetric distance matrix.
pub fn spectral_cluster_distances(dist: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterResult> {
    let n = dist.len();
    if k < 2 || k > n {
        return Err(Error::invalid(format!("spectral clustering needs 2 <= k <= {n}, got {k}")));
    }
    let embedding = spectral_embedding(dist, k)?;
    let opts = KMeansOptions { init: Init::FarthestFirst, ..Default::default() };
    Ok(kmeans_with(&embedding, k, seed, &opts)?.result)
}

/// Row-normalized top-`k` eigenvectors of `D^-1/2 A D^-1/2`, where `A` is the
/// Gaussian affinity with the median pairwise distance as bandwidth.
pub fn spectral_embedding(dist: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>> {
    let n = dist.len();
    if dist.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("distance matrix must be square".into()));
    }
    let sigma = bandwidth(dist);
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = 0.5 * (dist[i][j] + dist[j][i]);
                a[(i, j)] = match sigma {
                    Some(s) => (-d * d / (2.0 * s * s)).exp(),
                    None => 1.0,
                };
            }
        }
    }
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let deg: f64 = a.row(i).sum();
            if deg > 0.0 {
                1.0 / deg.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    // Largest eigenvalues of the normalized affinity are the smallest of the Laplacian.
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    let cols = &order[..k];
    Ok((0..n)
        .map(|i| {
            let row: Vec<f64> = cols.iter().map(|&c| eig.eigenvectors[(i, c)]).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.into_iter().map(|v| v / norm).collect()
            } else {
                row
            }
        })
        .collect())
}

/// Median off-diagonal distance; falls back to the median positive distance,
/// and to `None` (unit affinity) when every distance is zero.
fn bandwidth(dist: &[Vec<f64>]) -> Option<f64> {
    let mut all: Vec<f64> = Vec::new();
    for i in 0..dist.len() {
        for j in (i + 1)..dist.len() {
            all.push(dist[i][j]);
        }
    }
    let median = |v: &mut Vec<f64>| -> Option<f64> {
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
    };
    match median(&mut all) {
        Some(s) if s > 0.0 => Some(s),
        _ => {
            let mut pos: Vec<f64> = all.into_iter().filter(|&d| d > 0.0).collect();
            median(&mut pos)
        }
    }
}

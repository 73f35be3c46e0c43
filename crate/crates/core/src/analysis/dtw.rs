use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClusterResult;
use crate::error::{Error, Result};
use crate::grid::dist;
use crate::par;

/// Dynamic time warping cost with Euclidean point cost and no warping window.
pub fn dtw_distance<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for p in a {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(cur[j - 1]);
            cur[j] = dist(p, &b[j - 1]) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// Symmetric DTW distance matrix.
pub fn dtw_matrix<const D: usize>(seqs: &[Vec<[f64; D]>]) -> Vec<Vec<f64>> {
    let n = seqs.len();
    let upper: Vec<Vec<f64>> =
        par::map_indices(n, |i| ((i + 1)..n).map(|j| dtw_distance(&seqs[i], &seqs[j])).collect());
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for (off, &d) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    m
}

/// k-medoids (alternating assignment and medoid update) on a distance matrix;
/// the k-means analog for non-vector distances.
pub fn kmedoids(dist: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterResult> {
    let n = dist.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in [1, {n}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..10 {
        // Seeded k-means++-style initialization on distances.
        let mut medoids = vec![rng.random_range(0..n)];
        while medoids.len() < k {
            let near: Vec<f64> =
                (0..n).map(|i| medoids.iter().map(|&m| dist[i][m]).fold(f64::INFINITY, f64::min).powi(2)).collect();
            let total: f64 = near.iter().sum();
            let pick = if total > 0.0 {
                let mut t = rng.random::<f64>() * total;
                let mut pick = n - 1;
                for (i, &d) in near.iter().enumerate() {
                    if d > 0.0 && t < d {
                        pick = i;
                        break;
                    }
                    t -= d;
                }
                pick
            } else {
                (0..n).find(|i| !medoids.contains(i)).expect("k <= n")
            };
            medoids.push(pick);
        }
        let mut labels = assign(dist, &medoids);
        for _ in 0..100 {
            for (c, m) in medoids.iter_mut().enumerate() {
                let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
                if let Some(&best_m) = members.iter().min_by(|&&x, &&y| {
                    let cx: f64 = members.iter().map(|&i| dist[x][i]).sum();
                    let cy: f64 = members.iter().map(|&i| dist[y][i]).sum();
                    cx.total_cmp(&cy).then(x.cmp(&y))
                }) {
                    *m = best_m;
                }
            }
            let next = assign(dist, &medoids);
            if next == labels {
                break;
            }
            labels = next;
        }
        let cost: f64 = (0..n).map(|i| dist[i][medoids[labels[i]]]).sum();
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, labels));
        }
    }
    Ok(ClusterResult { labels: best.expect("restarts").1, k, seed })
}

fn assign(dist: &[Vec<f64>], medoids: &[usize]) -> Vec<usize> {
    (0..dist.len())
        .map(|i| {
            let mut best = 0;
            for (c, &m) in medoids.iter().enumerate() {
                if dist[i][m] < dist[i][medoids[best]] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

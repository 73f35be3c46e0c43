use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sq_dist, ClusterResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// k-means++ sampling proportional to squared distance.
    PlusPlus,
    /// Random first center, then repeatedly the point farthest from all chosen centers.
    FarthestFirst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub init: Init,
    /// Independent restarts; the lowest final objective wins.
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self { init: Init::PlusPlus, restarts: 10, max_iter: 300 }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansOutput {
    pub result: ClusterResult,
    pub centroids: Vec<Vec<f64>>,
    /// Objective after each assignment step of the winning restart.
    pub objective_trace: Vec<f64>,
}

/// Lloyd's k-means with default options.
pub fn kmeans(data: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterResult> {
    Ok(kmeans_with(data, k, seed, &KMeansOptions::default())?.result)
}

pub fn kmeans_with(data: &[Vec<f64>], k: usize, seed: u64, opts: &KMeansOptions) -> Result<KMeansOutput> {
    if data.is_empty() {
        return Err(Error::invalid("k-means needs at least one input"));
    }
    if k == 0 || k > data.len() {
        return Err(Error::invalid(format!("k = {k} must lie in [1, {}]", data.len())));
    }
    let dim = data[0].len();
    if data.iter().any(|v| v.len() != dim) {
        return Err(Error::Shape("k-means inputs have differing lengths".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansOutput> = None;
    for _ in 0..opts.restarts.max(1) {
        let centers = initial_centers(data, k, opts.init, &mut rng);
        let run = lloyd(data, centers, opts.max_iter, seed);
        let better = match &best {
            None => true,
            Some(b) => run.objective_trace.last() < b.objective_trace.last(),
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn initial_centers(data: &[Vec<f64>], k: usize, init: Init, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut nearest: Vec<f64> = data.iter().map(|v| sq_dist(v, &data[first])).collect();
    while chosen.len() < k {
        let next = match init {
            Init::FarthestFirst => argmax(&nearest),
            Init::PlusPlus => {
                let total: f64 = nearest.iter().sum();
                if total <= 0.0 {
                    argmax(&nearest)
                } else {
                    let mut target = rng.random::<f64>() * total;
                    let mut pick = n - 1;
                    for (i, &d) in nearest.iter().enumerate() {
                        if d > 0.0 && target < d {
                            pick = i;
                            break;
                        }
                        target -= d;
                    }
                    pick
                }
            }
        };
        chosen.push(next);
        for (i, v) in data.iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(v, &data[next]));
        }
    }
    chosen.into_iter().map(|i| data[i].clone()).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn assign(data: &[Vec<f64>], centers: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    data.iter()
        .map(|v| {
            let mut best = (0, f64::INFINITY);
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(v, center);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

fn lloyd(data: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize, seed: u64) -> KMeansOutput {
    let k = centers.len();
    let dim = data[0].len();
    let (mut labels, mut cost) = assign(data, &centers);
    let mut trace = vec![cost.iter().sum::<f64>()];
    for _ in 0..max_iter {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (v, &l) in data.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(v) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // Re-seed an empty cluster at the point worst served by its center.
                let far = argmax(&cost);
                centers[c] = data[far].clone();
                cost[far] = 0.0;
            }
        }
        let (next, next_cost) = assign(data, &centers);
        trace.push(next_cost.iter().sum());
        let converged = next == labels;
        labels = next;
        cost = next_cost;
        if converged {
            break;
        }
    }
    KMeansOutput { result: ClusterResult { labels, k, seed }, centroids: centers, objective_trace: trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, 0.3).unwrap();
        let mut data = Vec::new();
        let mut truth = Vec::new();
        for (c, off) in [0.0, 10.0].iter().enumerate() {
            for _ in 0..20 {
                data.push(vec![off + n.sample(&mut rng), n.sample(&mut rng)]);
                truth.push(c);
            }
        }
        (data, truth)
    }

    #[test]
    fn k_one_is_all_zero() {
        let (d, _) = blobs(1);
        assert!(kmeans(&d, 1, 3).unwrap().labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn separable_blobs() {
        let (d, t) = blobs(2);
        let r = kmeans(&d, 2, 5).unwrap();
        assert_eq!(crate::analysis::cluster_accuracy(&r.labels, &t), 1.0);
        assert_eq!(r, kmeans(&d, 2, 5).unwrap());
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d: Vec<Vec<f64>> = (0..100).map(|_| (0..36).map(|_| rng.random::<f64>()).collect()).collect();
        for init in [Init::PlusPlus, Init::FarthestFirst] {
            let out = kmeans_with(&d, 6, 4, &KMeansOptions { init, restarts: 1, max_iter: 300 }).unwrap();
            for w in out.objective_trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", out.objective_trace);
            }
        }
    }

    #[test]
    fn duplicates_and_bad_k() {
        let d = vec![vec![1.0, 1.0]; 5];
        let r = kmeans(&d, 3, 0).unwrap();
        assert_eq!(r.labels.len(), 5);
        assert!(kmeans(&d, 6, 0).is_err());
        assert!(kmeans(&d, 0, 0).is_err());
    }
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sq_dist;
use crate::error::{Error, Result};

pub const DEFAULT_KNN_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmOptions {
    /// Hinge-loss weight (inverse regularization strength).
    pub c: f64,
    pub max_epochs: usize,
    /// Stop once the projected-gradient spread drops below this.
    pub tol: f64,
}

impl Default for SvmOptions {
    fn default() -> Self {
        Self { c: 1.0, max_epochs: 1000, tol: 1e-3 }
    }
}

/// One-vs-rest linear SVMs over standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearOvRModel {
    /// Class ids in increasing order; score rows follow this order.
    pub classes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Train with default options.
pub fn train_classifier(vectors: &[Vec<f64>], labels: &[usize]) -> Result<LinearOvRModel> {
    LinearOvRModel::train(vectors, labels, &SvmOptions::default())
}

impl LinearOvRModel {
    pub fn train(vectors: &[Vec<f64>], labels: &[usize], opts: &SvmOptions) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::Shape(format!("{} vectors but {} labels", vectors.len(), labels.len())));
        }
        let mut classes: Vec<usize> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape("training vectors differ in length".into()));
        }
        let n = vectors.len() as f64;
        let mean: Vec<f64> = (0..dim).map(|j| vectors.iter().map(|v| v[j]).sum::<f64>() / n).collect();
        let scale: Vec<f64> = (0..dim)
            .map(|j| {
                let var = vectors.iter().map(|v| (v[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var.sqrt() > 1e-12 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        // Standardized rows with a trailing constant bias feature.
        let xs: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| v.iter().zip(&mean).zip(&scale).map(|((x, m), s)| (x - m) / s).chain([1.0]).collect())
            .collect();
        let mut weights = Vec::with_capacity(classes.len());
        let mut bias = Vec::with_capacity(classes.len());
        for (ci, &c) in classes.iter().enumerate() {
            let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            let mut w = dual_cd(&xs, &y, opts, ci as u64);
            bias.push(w.pop().expect("bias term"));
            weights.push(w);
        }
        Ok(Self { classes, weights, bias, mean, scale })
    }

    /// Per-class decision values in `classes` order.
    pub fn scores(&self, v: &[f64]) -> Vec<f64> {
        let x: Vec<f64> = v.iter().zip(&self.mean).zip(&self.scale).map(|((x, m), s)| (x - m) / s).collect();
        self.weights.iter().zip(&self.bias).map(|(w, b)| w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + b).collect()
    }

    /// Highest-scoring class; ties go to the lowest class id.
    pub fn classify(&self, v: &[f64]) -> usize {
        let s = self.scores(v);
        let mut best = 0;
        for i in 1..s.len() {
            if s[i] > s[best] {
                best = i;
            }
        }
        self.classes[best]
    }
}

/// Dual coordinate descent for the L2-regularized hinge-loss SVM.
fn dual_cd(xs: &[Vec<f64>], y: &[f64], opts: &SvmOptions, seed: u64) -> Vec<f64> {
    let dim = xs[0].len();
    let mut w = vec![0.0; dim];
    let mut alpha = vec![0.0; xs.len()];
    let qdiag: Vec<f64> = xs.iter().map(|x| x.iter().map(|v| v * v).sum()).collect();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..opts.max_epochs {
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let g = y[i] * xs[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= opts.c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 && qdiag[i] > 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qdiag[i]).clamp(0.0, opts.c);
                let step = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(&xs[i]) {
                    *wj += step * xj;
                }
            }
        }
        if pg_max - pg_min < opts.tol {
            break;
        }
    }
    w
}

/// Majority vote among the `k` nearest training vectors. Vote ties go to the
/// smallest summed distance, then to the lowest class id.
pub fn knn_classify(train: &[Vec<f64>], labels: &[usize], v: &[f64], k: usize) -> Result<usize> {
    if train.is_empty() || train.len() != labels.len() {
        return Err(Error::Shape(format!("{} training vectors with {} labels", train.len(), labels.len())));
    }
    let k = k.clamp(1, train.len());
    let mut d: Vec<(f64, usize)> = train.iter().enumerate().map(|(i, t)| (sq_dist(t, v).sqrt(), i)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes: Vec<(usize, usize, f64)> = Vec::new();
    for &(dist, i) in &d[..k] {
        match votes.iter_mut().find(|e| e.0 == labels[i]) {
            Some(e) => {
                e.1 += 1;
                e.2 += dist;
            }
            None => votes.push((labels[i], 1, dist)),
        }
    }
    votes.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0)));
    Ok(votes[0].0)
}

//! Experiment drivers: clustering with baselines, classification with
//! repeated splits, abnormality detection and the robustness sweep.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    auc, cluster_accuracy, confusion_matrix, detect, detection_rates, dtw_matrix, ed_features, fit_abnormality,
    kmeans, kmedoids, knn_classify, roc_curve, spectral_cluster, spectral_cluster_distances, train_classifier,
    DetectionRates, ED_POINTS,
};
use crate::droplet::abnormality_score;
use crate::error::{Error, Result};
use crate::pipeline::{Pipeline, RunConfig};
use crate::trajectory::{corrupt, CorruptMode, Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterMethod {
    DropletSpectral,
    EdKmeans,
    EdSpectral,
    DtwKmeans,
    DtwSpectral,
}

impl ClusterMethod {
    pub const ALL: [ClusterMethod; 5] =
        [Self::DropletSpectral, Self::EdKmeans, Self::EdSpectral, Self::DtwKmeans, Self::DtwSpectral];

    pub fn name(self) -> &'static str {
        match self {
            Self::DropletSpectral => "droplet+sc",
            Self::EdKmeans => "ed+kmeans",
            Self::EdSpectral => "ed+sc",
            Self::DtwKmeans => "dtw+kmeans",
            Self::DtwSpectral => "dtw+sc",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterOutcome {
    pub method: ClusterMethod,
    pub accuracy: f64,
    pub labels: Vec<usize>,
}

fn truth_of(set: &TrajectorySet<2>) -> Result<Vec<usize>> {
    let t = set.label_indices();
    if t.contains(&usize::MAX) {
        return Err(Error::invalid("every trajectory needs a label for accuracy reporting"));
    }
    Ok(t)
}

/// Cluster `set` into `k` groups with each requested method and score
/// against its labels.
pub fn run_clustering(
    set: &TrajectorySet<2>,
    k: usize,
    config: &RunConfig,
    methods: &[ClusterMethod],
) -> Result<Vec<ClusterOutcome>> {
    let truth = truth_of(set)?;
    let seed = config.seed;
    let ed: Vec<Vec<f64>> = set.trajectories.iter().map(|t| ed_features(t, ED_POINTS)).collect();
    let mut dtw = None;
    let mut out = Vec::new();
    for &m in methods {
        let result = match m {
            ClusterMethod::DropletSpectral => {
                let p = Pipeline::fit(set, config)?;
                spectral_cluster(&p.droplets(&set.trajectories)?, k, seed)?
            }
            ClusterMethod::EdKmeans => kmeans(&ed, k, seed)?,
            ClusterMethod::EdSpectral => spectral_cluster(&ed, k, seed)?,
            ClusterMethod::DtwKmeans | ClusterMethod::DtwSpectral => {
                let d = dtw.get_or_insert_with(|| {
                    let seqs: Vec<Vec<[f64; 2]>> = set.trajectories.iter().map(|t| t.points.clone()).collect();
                    dtw_matrix(&seqs)
                });
                if m == ClusterMethod::DtwKmeans {
                    kmedoids(d, k, seed)?
                } else {
                    spectral_cluster_distances(d, k, seed)?
                }
            }
        };
        out.push(ClusterOutcome { method: m, accuracy: cluster_accuracy(&result.labels, &truth), labels: result.labels });
    }
    Ok(out)
}

/// Droplet + spectral clustering accuracy on an existing set.
pub fn droplet_cluster_accuracy(set: &TrajectorySet<2>, k: usize, config: &RunConfig) -> Result<f64> {
    Ok(run_clustering(set, k, config, &[ClusterMethod::DropletSpectral])?[0].accuracy)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub mode: String,
    pub level: f64,
    pub accuracy: f64,
}

/// Clustering accuracy under noise levels {1,2,3} cells and omit fractions
/// {0.1,0.2,0.3,0.4} of both ends.
pub fn robustness_sweep(set: &TrajectorySet<2>, k: usize, config: &RunConfig) -> Result<Vec<RobustnessRow>> {
    let mut rows = Vec::new();
    let plan: Vec<(CorruptMode, &str, f64)> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&l| (CorruptMode::Noise, "noise", l))
        .chain([0.1, 0.2, 0.3, 0.4].iter().map(|&g| (CorruptMode::OmitHead, "omit", g)))
        .collect();
    for (i, (mode, name, level)) in plan.into_iter().enumerate() {
        let (mut corrupted, _) = corrupt(set, mode, level, config.seed.wrapping_add(1 + i as u64))?;
        if mode == CorruptMode::OmitHead {
            // Break the remaining selected trajectories at the tail with an independent draw.
            corrupted = corrupt(&corrupted, CorruptMode::OmitTail, level, config.seed.wrapping_add(101 + i as u64))?.0;
        }
        rows.push(RobustnessRow { mode: name.into(), level, accuracy: droplet_cluster_accuracy(&corrupted, k, config)? });
    }
    Ok(rows)
}

/// Seeded half/half split stratified by label.
pub fn stratified_split(labels: &[usize], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        let half = idx.len().div_ceil(2);
        train.extend_from_slice(&idx[..half]);
        test.extend_from_slice(&idx[half..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classifier {
    Linear,
    Knn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyRun {
    pub seed: u64,
    pub accuracy: f64,
    /// Rows are predictions, columns truth, both indexed by label order.
    pub confusion: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub labels: Vec<String>,
    pub classifier: Classifier,
    pub runs: Vec<ClassifyRun>,
    pub mean_accuracy: f64,
    pub mean_confusion: Vec<Vec<f64>>,
}

/// Train/test on `splits` seeded 50/50 splits. The field is built from each
/// split's training trajectories only.
pub fn run_classification(
    set: &TrajectorySet<2>,
    config: &RunConfig,
    classifier: Classifier,
    splits: usize,
) -> Result<ClassifyReport> {
    let truth = truth_of(set)?;
    let labels = set.labels();
    let nc = labels.len();
    let mut runs = Vec::new();
    for s in 0..splits.max(1) {
        let seed = config.seed.wrapping_add(s as u64);
        let (tr, te) = stratified_split(&truth, seed);
        let train = set.subset(&tr)?;
        let p = Pipeline::fit(&train, config)?;
        let xtr = p.droplets(&train.trajectories)?;
        let ytr: Vec<usize> = tr.iter().map(|&i| truth[i]).collect();
        let test: Vec<Trajectory<2>> = te.iter().map(|&i| set.trajectories[i].clone()).collect();
        let xte = p.droplets(&test)?;
        let yte: Vec<usize> = te.iter().map(|&i| truth[i]).collect();
        let pred = predict(&xtr, &ytr, &xte, classifier, config.knn_k)?;
        runs.push(ClassifyRun { seed, accuracy: accuracy(&pred, &yte), confusion: square_confusion(&pred, &yte, nc) });
    }
    let mean_accuracy = runs.iter().map(|r| r.accuracy).sum::<f64>() / runs.len() as f64;
    let mean_confusion = (0..nc)
        .map(|i| (0..nc).map(|j| runs.iter().map(|r| r.confusion[i][j] as f64).sum::<f64>() / runs.len() as f64).collect())
        .collect();
    Ok(ClassifyReport { labels, classifier, runs, mean_accuracy, mean_confusion })
}

pub fn predict(
    xtr: &[Vec<f64>],
    ytr: &[usize],
    xte: &[Vec<f64>],
    classifier: Classifier,
    knn_k: usize,
) -> Result<Vec<usize>> {
    match classifier {
        Classifier::Linear => {
            let m = train_classifier(xtr, ytr)?;
            Ok(xte.iter().map(|v| m.classify(v)).collect())
        }
        Classifier::Knn => xte.iter().map(|v| knn_classify(xtr, ytr, v, knn_k)).collect(),
    }
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

fn square_confusion(pred: &[usize], truth: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut m = confusion_matrix(pred, truth);
    m.resize(n, Vec::new());
    for row in m.iter_mut() {
        row.resize(n, 0);
    }
    m
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub threshold: f64,
    pub t_min: f64,
    pub rates: DetectionRates,
    pub auc: f64,
    pub roc: Vec<(f64, f64)>,
    /// Per test trajectory: id, score, truly abnormal, flagged.
    pub scores: Vec<(String, f64, bool, bool)>,
    /// Accuracy of the linear classifier on test trajectories judged normal and truly normal.
    pub classification_accuracy: Option<f64>,
}

/// Calibrate on normal training trajectories and evaluate on a mixed test set.
/// `is_abnormal` marks test trajectories that are truly abnormal.
pub fn run_detection(
    train: &TrajectorySet<2>,
    test: &[Trajectory<2>],
    is_abnormal: &[bool],
    config: &RunConfig,
) -> Result<DetectionReport> {
    if test.len() != is_abnormal.len() {
        return Err(Error::Shape("one abnormality flag per test trajectory".into()));
    }
    let p = Pipeline::fit(train, config)?;
    let xtr = p.droplets(&train.trajectories)?;
    let model = fit_abnormality(&xtr)?;
    let xte = p.droplets(test)?;
    let flagged: Vec<bool> = xte.iter().map(|v| detect(&model, v)).collect();
    let s: Vec<f64> = xte.iter().map(|v| abnormality_score(v)).collect();
    let roc = roc_curve(&s, is_abnormal);
    let classification_accuracy = {
        let labels = train.labels();
        let ytr = train.label_indices();
        if labels.len() >= 2 && !ytr.contains(&usize::MAX) {
            let m = train_classifier(&xtr, &ytr)?;
            let (mut hit, mut n) = (0, 0);
            for (i, t) in test.iter().enumerate() {
                if is_abnormal[i] || flagged[i] {
                    continue;
                }
                if let Some(l) = t.label.as_ref().and_then(|l| labels.iter().position(|x| x == l)) {
                    n += 1;
                    hit += (m.classify(&xte[i]) == l) as usize;
                }
            }
            (n > 0).then(|| hit as f64 / n as f64)
        } else {
            None
        }
    };
    Ok(DetectionReport {
        threshold: model.threshold,
        t_min: model.t_min,
        rates: detection_rates(&flagged, is_abnormal),
        auc: auc(&roc),
        roc,
        scores: test.iter().zip(&s).zip(is_abnormal.iter().zip(&flagged)).map(|((t, &sc), (&a, &f))| (t.id.clone(), sc, a, f)).collect(),
        classification_accuracy,
    })
}

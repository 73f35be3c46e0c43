use serde::{Deserialize, Serialize};

/// Row-to-column assignment maximizing total weight on a (padded) square matrix.
/// Returns, for each row, its matched column.
pub fn max_weight_matching(weights: &[Vec<f64>]) -> Vec<usize> {
    let rows = weights.len();
    let cols = weights.iter().map(Vec::len).max().unwrap_or(0);
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| -> f64 { -weights.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0) };
    // Hungarian algorithm with potentials, 1-based internally.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment.truncate(rows);
    assignment
}

/// Contingency counts `m[pred][truth]`.
pub fn confusion_matrix(pred: &[usize], truth: &[usize]) -> Vec<Vec<usize>> {
    let kp = pred.iter().max().map_or(0, |m| m + 1);
    let kt = truth.iter().max().map_or(0, |m| m + 1);
    let mut m = vec![vec![0usize; kt]; kp];
    for (&p, &t) in pred.iter().zip(truth) {
        m[p][t] += 1;
    }
    m
}

/// Fraction of inputs correctly clustered under the best one-to-one matching
/// between predicted and true labels.
pub fn cluster_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "label vectors differ in length");
    if pred.is_empty() {
        return 1.0;
    }
    let m = confusion_matrix(pred, truth);
    let w: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&c| c as f64).collect()).collect();
    let assignment = max_weight_matching(&w);
    let correct: usize = assignment.iter().enumerate().map(|(i, &j)| m[i].get(j).copied().unwrap_or(0)).sum();
    correct as f64 / pred.len() as f64
}

/// ROC points for scores where *lower* means more abnormal; abnormal is the
/// positive class. Thresholds sweep the sorted unique scores, flagging
/// everything at or below each one.
pub fn roc_curve(scores: &[f64], abnormal: &[bool]) -> Vec<(f64, f64)> {
    assert_eq!(scores.len(), abnormal.len(), "scores and flags differ in length");
    let pos = abnormal.iter().filter(|&&a| a).count() as f64;
    let neg = abnormal.len() as f64 - pos;
    let rate = |x: f64, total: f64| if total > 0.0 { x / total } else { 0.0 };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut curve = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if abnormal[order[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        curve.push((rate(fp, neg), rate(tp, pos)));
    }
    if curve.last() != Some(&(1.0, 1.0)) && pos > 0.0 && neg > 0.0 {
        curve.push((1.0, 1.0));
    }
    curve
}

/// Trapezoid area under a curve of `(x, y)` points sorted by `x`.
pub fn auc(curve: &[(f64, f64)]) -> f64 {
    curve.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRates {
    /// Fraction of abnormal inputs flagged.
    pub detection_rate: f64,
    /// Fraction of normal inputs flagged.
    pub false_positive_rate: f64,
}

pub fn detection_rates(flagged: &[bool], abnormal: &[bool]) -> DetectionRates {
    let count = |want: bool| {
        let total = abnormal.iter().filter(|&&a| a == want).count();
        let hit = flagged.iter().zip(abnormal).filter(|&(&f, &a)| f && a == want).count();
        if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        }
    };
    DetectionRates { detection_rate: count(true), false_positive_rate: count(false) }
}

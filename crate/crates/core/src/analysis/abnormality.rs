use serde::{Deserialize, Serialize};

use crate::droplet::abnormality_score;
use crate::error::{Error, Result};

/// Threshold as a fraction of the smallest training score.
pub const THRESHOLD_FACTOR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbnormalityModel {
    /// Smallest score over the normal training set.
    pub t_min: f64,
    pub threshold: f64,
}

/// Calibrate on normal training vectors: threshold = 0.9 x smallest score.
pub fn fit_abnormality(train: &[Vec<f64>]) -> Result<AbnormalityModel> {
    if train.is_empty() {
        return Err(Error::invalid("abnormality model needs at least one training vector"));
    }
    let t_min = train.iter().map(|v| abnormality_score(v)).fold(f64::INFINITY, f64::min);
    if !(t_min > 0.0) {
        log::warn!("smallest training score {t_min} is not positive; nothing will be flagged");
    }
    Ok(AbnormalityModel { t_min, threshold: THRESHOLD_FACTOR * t_min })
}

/// Abnormal iff the score is strictly below the threshold.
pub fn detect(model: &AbnormalityModel, v: &[f64]) -> bool {
    abnormality_score(v) < model.threshold
}

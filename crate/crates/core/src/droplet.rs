//! Water-droplet flow through a tube and the resulting feature vector.
//!
//! For each ray `b`, the lag `D_n` between the droplet center and boundary point
//! evolves as `D_n = f(r_{b,n-1}) * D_{n-1} + lambda2 * cos(theta_{b,n-1})`
//! with `D_0 = v_C` and `f(r) = 1 - lambda1 / r`. The time-axis distance is the
//! mean lag over the `L` slices, floored at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, norm, sub};
use crate::tube::Tube;

/// Radii below this are treated as this value.
pub const MIN_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropletParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v_c: f64,
    /// Clamp the viscosity factor to [0, 1].
    pub clamp: bool,
}

impl Default for DropletParams {
    fn default() -> Self {
        Self { lambda1: 2.0, lambda2: 0.1, v_c: 1.0, clamp: true }
    }
}

impl DropletParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(Error::invalid("lambda1 and lambda2 must be non-negative"));
        }
        if !(self.v_c > 0.0 && self.v_c.is_finite()) {
            return Err(Error::invalid("v_C must be positive"));
        }
        Ok(())
    }

    #[inline]
    pub fn factor(&self, r: f64) -> f64 {
        let f = 1.0 - self.lambda1 / r.max(MIN_RADIUS);
        if self.clamp {
            f.clamp(0.0, 1.0)
        } else {
            f
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Droplet {
    /// Time-axis distances, one per tube ray, in ray order.
    pub values: Vec<f64>,
    pub params: DropletParams,
}

impl Droplet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Size of the droplet disc: mean squared distance.
    pub fn area(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().map(|d| d * d).sum::<f64>() / self.values.len() as f64
    }
}

/// Unit motion direction of each step `n-1 -> n`; `None` for a stationary step.
fn motion_directions<const D: usize>(tube: &Tube<D>) -> Vec<Option<[f64; D]>> {
    tube.slices
        .windows(2)
        .map(|w| {
            let d = sub(&w[1].center, &w[0].center);
            let n = norm(&d);
            (n > 1e-12).then(|| std::array::from_fn(|i| d[i] / n))
        })
        .collect()
}

pub fn flow_droplet<const D: usize>(tube: &Tube<D>, params: &DropletParams) -> Result<Droplet> {
    params.validate()?;
    let l = tube.len();
    if l < 2 {
        return Err(Error::invalid(format!("droplet needs a tube of at least 2 slices, got {l}")));
    }
    let motion = motion_directions(tube);
    let values = tube
        .directions
        .iter()
        .enumerate()
        .map(|(b, ray)| {
            let mut lag = params.v_c;
            let mut total = lag;
            for n in 1..l {
                let friction = motion[n - 1].map_or(0.0, |m| params.lambda2 * dot(ray, &m));
                lag = params.factor(tube.slices[n - 1].radii[b]) * lag + friction;
                total += lag;
            }
            (total / l as f64).max(0.0)
        })
        .collect();
    Ok(Droplet { values, params: *params })
}

/// Feature vector in ray order.
pub fn droplet_vector(d: &Droplet) -> Vec<f64> {
    d.values.clone()
}

/// Max plus mean of the vector; lower is more abnormal.
pub fn abnormality_score(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().sum::<f64>() / v.len() as f64
}

//! End-to-end configuration and the field -> tube -> droplet pipeline.

use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionOptions, NeighborRule, DEFAULT_E_EPS, DEFAULT_N_DIRS};
use crate::droplet::{flow_droplet, DropletParams};
use crate::error::{Error, Result};
use crate::field::{build_transfer_field, FieldParams, KernelOptions, ThermalTransferField};
use crate::par;
use crate::trajectory::{resample, Trajectory, TrajectorySet};
use crate::tube::{Tube, TubeBuilder, DEFAULT_CACHE_BUDGET};

/// Every tunable of a run. Serializes flat so it can double as a manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub sigma: f64,
    /// `None` means `W * H`.
    pub kappa: Option<f64>,
    pub eta: f64,
    pub e_eps: f64,
    pub n_dirs: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub v_c: f64,
    /// Longest grid axis when the grid is inferred from data.
    pub max_cells: usize,
    pub seed: u64,
    pub squared_kernel: bool,
    pub strict_b8: bool,
    pub no_clamp: bool,
    /// Kernel truncation radius in units of sigma; `None` disables truncation.
    pub truncate: Option<f64>,
    /// Resampling spacing in cells; `None` keeps raw samples.
    pub resample: Option<f64>,
    pub knn_k: usize,
    pub cache_budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            kappa: None,
            eta: 1.0,
            e_eps: DEFAULT_E_EPS,
            n_dirs: DEFAULT_N_DIRS,
            lambda1: 2.0,
            lambda2: 0.1,
            v_c: 1.0,
            max_cells: crate::grid::DEFAULT_MAX_CELLS,
            seed: 0,
            squared_kernel: false,
            strict_b8: false,
            no_clamp: false,
            truncate: Some(4.0),
            resample: Some(1.0),
            knn_k: crate::analysis::DEFAULT_KNN_K,
            cache_budget: DEFAULT_CACHE_BUDGET,
        }
    }
}

impl RunConfig {
    pub fn field_params(&self) -> FieldParams {
        FieldParams {
            kernel: KernelOptions { sigma: self.sigma, squared: self.squared_kernel, truncate: self.truncate },
            kappa: self.kappa,
            eta: self.eta,
        }
    }

    pub fn diffusion(&self) -> DiffusionOptions {
        DiffusionOptions {
            e_eps: self.e_eps,
            rule: if self.strict_b8 { NeighborRule::AllNeighbors } else { NeighborRule::Inner },
        }
    }

    pub fn droplet(&self) -> DropletParams {
        DropletParams { lambda1: self.lambda1, lambda2: self.lambda2, v_c: self.v_c, clamp: !self.no_clamp }
    }

    /// Set one option from its flag name (`sigma`, `lambda1`, `strict-b8`, ...).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let bad = |e: &dyn std::fmt::Display| Error::invalid(format!("{key} = {value:?}: {e}"));
        let float = |v: &str| v.parse::<f64>().map_err(|e| bad(&e));
        let int = |v: &str| v.parse::<usize>().map_err(|e| bad(&e));
        let flag = |v: &str| match v {
            "" | "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            _ => Err(bad(&"expected a boolean")),
        };
        let optional = |v: &str| -> Result<Option<f64>> {
            match v {
                "none" | "off" | "auto" => Ok(None),
                _ => float(v).map(Some),
            }
        };
        match key.as_str() {
            "sigma" => self.sigma = float(value)?,
            "kappa" => self.kappa = optional(value)?,
            "eta" => self.eta = float(value)?,
            "e-eps" => self.e_eps = float(value)?,
            "n-dirs" => self.n_dirs = int(value)?,
            "lambda1" => self.lambda1 = float(value)?,
            "lambda2" => self.lambda2 = float(value)?,
            "v-c" => self.v_c = float(value)?,
            "max-cells" | "grid-size" => self.max_cells = int(value)?,
            "seed" => self.seed = value.parse().map_err(|e| bad(&e))?,
            "squared-kernel" => self.squared_kernel = flag(value)?,
            "strict-b8" => self.strict_b8 = flag(value)?,
            "no-clamp" => self.no_clamp = flag(value)?,
            "truncate" => self.truncate = optional(value)?,
            "resample" => self.resample = optional(value)?,
            "knn-k" => self.knn_k = int(value)?,
            "cache-budget" => self.cache_budget = int(value)?,
            _ => return Err(Error::invalid(format!("unknown option {key:?}"))),
        }
        Ok(())
    }

    /// Parse a flat `key = value` file; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').unwrap_or((line, ""));
            self.set(k, v).map_err(|e| Error::Parse { path: "config".into(), line: i + 1, message: e.to_string() })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.eta > 0.0 && self.e_eps > 0.0) {
            return Err(Error::invalid("sigma, eta and e-eps must be positive"));
        }
        if self.kappa.is_some_and(|k| !(k > 0.0)) {
            return Err(Error::invalid("kappa must be positive"));
        }
        if self.n_dirs < 4 {
            return Err(Error::invalid("n-dirs must be at least 4"));
        }
        if self.resample.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::invalid("resample spacing must be positive"));
        }
        self.droplet().validate()
    }
}

/// A transfer field plus the settings needed to turn trajectories into droplets.
pub struct Pipeline {
    pub config: RunConfig,
    pub field: ThermalTransferField<2>,
}

impl Pipeline {
    /// Build the field from every trajectory in `set`, ignoring labels.
    pub fn fit(set: &TrajectorySet<2>, config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let set = match config.resample {
            Some(s) => set.resampled(s)?,
            None => set.clone(),
        };
        let field = build_transfer_field(&set, &config.field_params())?;
        Ok(Self { config: config.clone(), field })
    }

    pub fn from_field(field: ThermalTransferField<2>, config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config: config.clone(), field })
    }

    pub fn builder(&self) -> Result<TubeBuilder<'_, 2>> {
        Ok(TubeBuilder::planar(&self.field, self.config.n_dirs, self.config.diffusion())?
            .cache_budget(self.config.cache_budget))
    }

    fn prepare(&self, t: &Trajectory<2>) -> Result<Trajectory<2>> {
        match self.config.resample {
            Some(s) => resample(t, s * self.field.grid.cell_size),
            None => Ok(t.clone()),
        }
    }

    /// Tubes for the given trajectories, clamped onto the field's grid first.
    pub fn tubes(&self, trajs: &[Trajectory<2>]) -> Result<Vec<Tube<2>>> {
        let builder = self.builder()?;
        let prepared = trajs.iter().map(|t| self.clamped(t)).collect::<Result<Vec<_>>>()?;
        builder.build_all(&prepared)
    }

    fn clamped(&self, t: &Trajectory<2>) -> Result<Trajectory<2>> {
        let mut t = self.prepare(t)?;
        for p in t.points.iter_mut() {
            self.field.grid.clamp_scene(p);
        }
        Ok(t)
    }

    /// Droplet vectors in input order.
    pub fn droplets(&self, trajs: &[Trajectory<2>]) -> Result<Vec<Vec<f64>>> {
        let builder = self.builder()?;
        let params = self.config.droplet();
        par::map_indices(trajs.len(), |i| {
            let t = self.clamped(&trajs[i])?;
            let tube = builder.build(&t)?;
            Ok(flow_droplet(&tube, &params)?.values)
        })
        .into_iter()
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_overrides() {
        let mut c = RunConfig::default();
        c.apply_file_text("# comment\nsigma = 3\nlambda_1 = 1\nstrict-b8\nkappa = auto\n").unwrap_err();
        let mut c2 = RunConfig::default();
        c2.apply_file_text("sigma = 3 # inline\nlambda1=1.5\nstrict_b8\ntruncate = none\n").unwrap();
        assert_eq!(c2.sigma, 3.0);
        assert_eq!(c2.lambda1, 1.5);
        assert!(c2.strict_b8);
        assert_eq!(c2.truncate, None);
        c2.set("sigma", "2.5").unwrap();
        assert_eq!(c2.sigma, 2.5);
        assert!(c.set("bogus", "1").is_err());
    }

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!((c.e_eps, c.n_dirs, c.lambda1, c.lambda2, c.v_c), (100.0, 36, 2.0, 0.1, 1.0));
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
    }
}

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use tubelet::io::{load_trajectories_with, TrajectoryFormat};
use tubelet::synth::{presets, synth_scene, SyntheticSpec};
use tubelet::{RunConfig, TrajectorySet};

use crate::error::{CliError, CliResult};
use crate::manifest::Run;

/// Pipeline settings. A `--config` file is applied first, flags override it.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// Flat `key = value` file using the flag names below; `#` starts a comment.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Kernel bandwidth in cells.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Coefficient mass per direction [default: cell count].
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Initial diffusion energy.
    #[arg(long, allow_hyphen_values = true)]
    pub e_eps: Option<f64>,
    /// Rays per equipotential line.
    #[arg(long)]
    pub n_dirs: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    /// Droplet center speed.
    #[arg(long, allow_hyphen_values = true)]
    pub v_c: Option<f64>,
    /// Longest grid axis when the grid is inferred from data.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Root seed for every random choice.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use exp(-d^2 / 2 sigma^2) instead of exp(-d / 2 sigma^2).
    #[arg(long)]
    pub squared_kernel: bool,
    /// Divide diffusion sums by every in-grid neighbor.
    #[arg(long)]
    pub strict_b8: bool,
    /// Keep the raw droplet recurrence without clamping the factor to [0, 1].
    #[arg(long)]
    pub no_clamp: bool,
    /// Kernel cutoff in units of sigma, or `none`.
    #[arg(long, value_name = "SIGMAS|none")]
    pub truncate: Option<String>,
    /// Resampling spacing in cells, or `none`.
    #[arg(long, value_name = "CELLS|none")]
    pub resample: Option<String>,
    /// Neighbors for kNN classification.
    #[arg(long)]
    pub knn_k: Option<usize>,
    /// Any other option as KEY=VALUE; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl ConfigArgs {
    /// Apply the config file and flags on top of `base`.
    pub fn resolve(&self, mut base: RunConfig) -> CliResult<RunConfig> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
            base.apply_file_text(&text).map_err(|e| CliError::input(path, e))?;
        }
        let mut pairs: Vec<(&str, String)> = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k, v));
            }
        };
        put("sigma", self.sigma.map(|v| v.to_string()));
        put("kappa", self.kappa.map(|v| v.to_string()));
        put("eta", self.eta.map(|v| v.to_string()));
        put("e-eps", self.e_eps.map(|v| v.to_string()));
        put("n-dirs", self.n_dirs.map(|v| v.to_string()));
        put("lambda1", self.lambda1.map(|v| v.to_string()));
        put("lambda2", self.lambda2.map(|v| v.to_string()));
        put("v-c", self.v_c.map(|v| v.to_string()));
        put("max-cells", self.grid_size.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("truncate", self.truncate.clone());
        put("resample", self.resample.clone());
        put("knn-k", self.knn_k.map(|v| v.to_string()));
        for (flag, key) in [(self.squared_kernel, "squared-kernel"), (self.strict_b8, "strict-b8"), (self.no_clamp, "no-clamp")] {
            if flag {
                pairs.push((key, "true".into()));
            }
        }
        for (k, v) in &pairs {
            base.set(k, v)?;
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            base.set(k, v)?;
        }
        base.validate()?;
        Ok(base)
    }

    /// Record the config file, if any, as an input.
    pub fn record(&self, run: &mut Run) -> CliResult<()> {
        match &self.config {
            Some(p) => run.input(p),
            None => Ok(()),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

/// Trajectory file plus its format.
#[derive(Args, Debug, Clone)]
pub struct TrajInput {
    /// Trajectory file (JSONL or CSV).
    #[arg(long = "traj", short = 'i', value_name = "FILE")]
    pub path: PathBuf,
    /// Input format [default: from the extension].
    #[arg(long)]
    pub format: Option<Format>,
}

pub fn format_of(path: &Path, format: Option<Format>) -> TrajectoryFormat {
    match format {
        Some(Format::Jsonl) => TrajectoryFormat::Jsonl,
        Some(Format::Csv) => TrajectoryFormat::Csv,
        None => TrajectoryFormat::from_path(path),
    }
}

pub fn load(run: &mut Run, path: &Path, format: Option<Format>, config: &RunConfig) -> CliResult<TrajectorySet<2>> {
    run.input(path)?;
    let (set, report) =
        load_trajectories_with::<2>(path, format_of(path, format), config.max_cells).map_err(|e| CliError::input(path, e))?;
    if !report.dropped.is_empty() {
        log::warn!("{}: dropped {} trajectories shorter than 2 points", path.display(), report.dropped.len());
    }
    Ok(set)
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scene {
    /// Four routes through a crossroads.
    Intersection,
    /// Two adjacent lanes with different traffic plus a crossing stream.
    Adjacent,
    /// Seven normal routes for abnormality detection.
    SevenRoutes,
    /// Fifteen routes on a 64 x 64 grid.
    FifteenRoutes,
}

impl Scene {
    pub fn spec(self, count: usize) -> SyntheticSpec {
        match self {
            Self::Intersection => presets::intersection(count),
            Self::Adjacent => presets::adjacent_lanes(count),
            Self::SevenRoutes => presets::seven_routes(count),
            Self::FifteenRoutes => presets::fifteen_routes(count),
        }
    }

    pub fn generate(self, count: usize, seed: u64) -> CliResult<TrajectorySet<2>> {
        Ok(synth_scene(&self.spec(count), seed)?)
    }
}

//! The demo's state and operations, free of any JavaScript types so they can
//! be tested natively.

use serde_json::json;
use tubelet::diffusion::extract_equipotential;
use tubelet::export::{heatmap, polar_droplet_svg, Raster};
use tubelet::grid::ring_directions;
use tubelet::synth::{presets, synth_scene};
use tubelet::{flow_droplet, Error, Pipeline, Result, RunConfig, Tube, TrajectorySet};

pub struct Demo {
    pipeline: Pipeline,
    set: TrajectorySet<2>,
    tubes: Vec<Tube<2>>,
    probe: Option<Probe>,
}

/// Result of the last click: energy over the grid and the half-energy contour.
pub struct Probe {
    pub energies: Vec<f64>,
    /// Contour vertices as x0, y0, x1, y1, ... in grid coordinates.
    pub contour: Vec<f64>,
}

impl Demo {
    pub fn new(scene: &str, count: usize, seed: u64) -> Result<Self> {
        let spec = match scene {
            "intersection" => presets::intersection(count),
            "adjacent" => presets::adjacent_lanes(count),
            "seven-routes" => presets::seven_routes(count),
            _ => return Err(Error::InvalidParameter(format!("unknown scene {scene:?}"))),
        };
        let set = synth_scene(&spec, seed)?;
        let config = RunConfig { seed, ..RunConfig::default() };
        let pipeline = Pipeline::fit(&set, &config)?;
        let tubes = pipeline.tubes(&set.trajectories)?;
        Ok(Self { pipeline, set, tubes, probe: None })
    }

    pub fn dims(&self) -> [usize; 2] {
        self.pipeline.field.grid.dims
    }

    pub fn trajectory_count(&self) -> usize {
        self.set.trajectories.len()
    }

    /// Ids, labels and grid-coordinate points of every trajectory.
    pub fn trajectories_json(&self) -> String {
        let grid = &self.pipeline.field.grid;
        let list: Vec<_> = self
            .set
            .trajectories
            .iter()
            .map(|t| {
                let pts: Vec<[f64; 2]> = t.points.iter().map(|p| grid.to_grid(p)).collect();
                json!({ "id": t.id, "label": t.label, "points": pts })
            })
            .collect();
        serde_json::Value::Array(list).to_string()
    }

    /// One panel per direction plus a last one summing them.
    pub fn panel_count(&self) -> usize {
        self.pipeline.field.directions.len() + 1
    }

    pub fn panel_label(&self, panel: usize) -> &'static str {
        self.pipeline.field.directions.get(panel).map_or("all", |d| d.label())
    }

    /// Heatmap of one direction's coefficients; the last panel is their sum.
    pub fn field_raster(&self, panel: usize) -> Result<Raster> {
        let f = &self.pipeline.field;
        let [w, h] = f.grid.dims;
        let na = f.directions.len();
        if panel < na {
            let max = f.coeffs.iter().copied().fold(0.0, f64::max);
            heatmap(f.direction_slice(panel), w, h, max)
        } else if panel == na {
            let total: Vec<f64> = (0..w * h).map(|c| (0..na).map(|a| f.k(c, a)).sum()).collect();
            let max = total.iter().copied().fold(0.0, f64::max);
            heatmap(&total, w, h, max)
        } else {
            Err(Error::InvalidParameter(format!("panel {panel} out of range")))
        }
    }

    /// Diffuse from the cell nearest `(x, y)` and keep the result for drawing.
    pub fn probe(&mut self, x: f64, y: f64) -> Result<&Probe> {
        let f = &self.pipeline.field;
        let cell = f.grid.nearest_cell(&[x, y]).ok_or(Error::OutsideGrid { x, y })?;
        let config = &self.pipeline.config;
        let map = tubelet::diffuse(f, cell, &config.diffusion())?;
        let center = [cell[0] as f64, cell[1] as f64];
        let line = extract_equipotential(&map, center, config.n_dirs)?;
        let contour = line
            .radii
            .iter()
            .zip(ring_directions(config.n_dirs))
            .flat_map(|(r, d)| [center[0] + r * d[0], center[1] + r * d[1]])
            .collect();
        Ok(self.probe.insert(Probe { energies: map.full_energies(), contour }))
    }

    /// Energy of the last probe on a log scale so the tail stays visible.
    pub fn probe_raster(&self) -> Result<Raster> {
        let p = self.probe.as_ref().ok_or_else(|| Error::InvalidParameter("no probe yet".into()))?;
        let [w, h] = self.dims();
        let logged: Vec<f64> = p.energies.iter().map(|e| e.max(0.0).ln_1p()).collect();
        heatmap(&logged, w, h, self.pipeline.config.e_eps.ln_1p())
    }

    pub fn contour(&self) -> Vec<f64> {
        self.probe.as_ref().map(|p| p.contour.clone()).unwrap_or_default()
    }

    /// Droplet vector of trajectory `index` under the given friction weights.
    pub fn droplet(&self, index: usize, lambda1: f64, lambda2: f64) -> Result<Vec<f64>> {
        let tube = self.tubes.get(index).ok_or_else(|| Error::InvalidParameter(format!("no trajectory {index}")))?;
        let params = tubelet::DropletParams { lambda1, lambda2, ..self.pipeline.config.droplet() };
        Ok(flow_droplet(tube, &params)?.values)
    }

    pub fn droplet_svg(&self, index: usize, lambda1: f64, lambda2: f64) -> Result<String> {
        let v = self.droplet(index, lambda1, lambda2)?;
        polar_droplet_svg(&v, &self.set.trajectories[index].id)
    }
}

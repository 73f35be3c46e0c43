//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The page builds a synthetic scene, shows its transfer field, diffuses
//! energy from a clicked cell, and redraws a trajectory's droplet as the
//! friction sliders move. Coordinates crossing the boundary are grid
//! coordinates with `y = 0` at the bottom row.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: tubelet::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Scene {
    inner: demo::Demo,
}

#[wasm_bindgen]
impl Scene {
    /// `scene` is `intersection`, `adjacent` or `seven-routes`.
    #[wasm_bindgen(constructor)]
    pub fn new(scene: &str, count: usize, seed: u32) -> Result<Scene, JsError> {
        Ok(Self { inner: demo::Demo::new(scene, count, seed as u64).map_err(js)? })
    }

    pub fn width(&self) -> usize {
        self.inner.dims()[0]
    }

    pub fn height(&self) -> usize {
        self.inner.dims()[1]
    }

    #[wasm_bindgen(js_name = trajectoryCount)]
    pub fn trajectory_count(&self) -> usize {
        self.inner.trajectory_count()
    }

    /// JSON list of `{id, label, points}`.
    pub fn trajectories(&self) -> String {
        self.inner.trajectories_json()
    }

    #[wasm_bindgen(js_name = panelCount)]
    pub fn panel_count(&self) -> usize {
        self.inner.panel_count()
    }

    /// Direction name of a panel (`y-`, `x+`, ...), or `all` for the sum.
    #[wasm_bindgen(js_name = panelLabel)]
    pub fn panel_label(&self, panel: usize) -> String {
        self.inner.panel_label(panel).into()
    }

    /// RGBA rows top to bottom, `w * h * 4` bytes.
    #[wasm_bindgen(js_name = fieldRgba)]
    pub fn field_rgba(&self, panel: usize) -> Result<Vec<u8>, JsError> {
        Ok(self.inner.field_raster(panel).map_err(js)?.rgba)
    }

    /// Diffuse from the cell nearest `(x, y)`.
    pub fn probe(&mut self, x: f64, y: f64) -> Result<(), JsError> {
        self.inner.probe(x, y).map(|_| ()).map_err(js)
    }

    #[wasm_bindgen(js_name = probeRgba)]
    pub fn probe_rgba(&self) -> Result<Vec<u8>, JsError> {
        Ok(self.inner.probe_raster().map_err(js)?.rgba)
    }

    /// Half-energy contour of the last probe as `x0, y0, x1, y1, ...`.
    pub fn contour(&self) -> Vec<f64> {
        self.inner.contour()
    }

    pub fn droplet(&self, index: usize, lambda1: f64, lambda2: f64) -> Result<Vec<f64>, JsError> {
        self.inner.droplet(index, lambda1, lambda2).map_err(js)
    }

    #[wasm_bindgen(js_name = dropletSvg)]
    pub fn droplet_svg(&self, index: usize, lambda1: f64, lambda2: f64) -> Result<String, JsError> {
        self.inner.droplet_svg(index, lambda1, lambda2).map_err(js)
    }
}

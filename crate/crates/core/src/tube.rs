//! 3D tubes: per-point equipotential lines stacked in temporal order.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::diffusion::{extract_equipotential_along, DiffusionOptions, Diffuser, EquipotentialLine, ThermalDiffusionMap};
use crate::error::{Error, Result};
use crate::field::ThermalTransferField;
use crate::grid::{ring_directions, Cell};
use crate::par;
use crate::trajectory::Trajectory;

pub const DEFAULT_CACHE_BUDGET: usize = 4096;

/// Per-cell diffusion-map cache with least-recently-used eviction.
///
/// Lookups and insertions take a short lock; map computation runs outside it,
/// so two threads may race to compute the same cell. The first insertion wins
/// and both get identical maps since diffusion is deterministic.
pub struct MapCache<const D: usize = 2> {
    budget: usize,
    state: Mutex<CacheState<D>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

struct CacheState<const D: usize> {
    clock: u64,
    maps: HashMap<Cell<D>, (Arc<ThermalDiffusionMap<D>>, u64)>,
}

impl<const D: usize> MapCache<D> {
    pub fn new(budget: usize) -> Self {
        Self {
            budget: budget.max(1),
            state: Mutex::new(CacheState { clock: 0, maps: HashMap::new() }),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("cache lock").maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn get_or_compute(
        &self,
        cell: Cell<D>,
        compute: impl FnOnce() -> Result<ThermalDiffusionMap<D>>,
    ) -> Result<Arc<ThermalDiffusionMap<D>>> {
        {
            let mut st = self.state.lock().expect("cache lock");
            st.clock += 1;
            let now = st.clock;
            if let Some(entry) = st.maps.get_mut(&cell) {
                entry.1 = now;
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(entry.0.clone());
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let map = Arc::new(compute()?);
        let mut st = self.state.lock().expect("cache lock");
        st.clock += 1;
        let now = st.clock;
        let out = st.maps.entry(cell).or_insert((map, now)).0.clone();
        while st.maps.len() > self.budget {
            let oldest = st.maps.iter().min_by_key(|(_, (_, t))| *t).map(|(c, _)| *c).expect("non-empty");
            st.maps.remove(&oldest);
        }
        Ok(out)
    }
}

impl<const D: usize> Default for MapCache<D> {
    fn default() -> Self {
        Self::new(DEFAULT_CACHE_BUDGET)
    }
}

/// Stack of equipotential lines, one per trajectory point (grid coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tube<const D: usize = 2> {
    pub trajectory_id: String,
    pub slices: Vec<EquipotentialLine<D>>,
    /// Unit ray directions shared by all slices.
    #[serde(with = "crate::io::array_vec_serde")]
    pub directions: Vec<[f64; D]>,
}

impl<const D: usize> Tube<D> {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn mean_radius(&self) -> f64 {
        let n: usize = self.slices.iter().map(|s| s.radii.len()).sum();
        if n == 0 {
            return 0.0;
        }
        self.slices.iter().flat_map(|s| s.radii.iter()).sum::<f64>() / n as f64
    }
}

/// Builds tubes against one field, sharing a map cache across trajectories.
pub struct TubeBuilder<'a, const D: usize = 2> {
    diffuser: Diffuser<'a, D>,
    opts: DiffusionOptions,
    directions: Vec<[f64; D]>,
    cache: Option<MapCache<D>>,
}

impl<'a> TubeBuilder<'a, 2> {
    /// 2D builder with `n_dirs` rays per slice.
    pub fn planar(field: &'a ThermalTransferField<2>, n_dirs: usize, opts: DiffusionOptions) -> Result<Self> {
        if n_dirs < 4 {
            return Err(Error::invalid(format!("need at least 4 equipotential directions, got {n_dirs}")));
        }
        Ok(Self::with_directions(field, ring_directions(n_dirs), opts))
    }
}

impl<'a, const D: usize> TubeBuilder<'a, D> {
    pub fn with_directions(field: &'a ThermalTransferField<D>, directions: Vec<[f64; D]>, opts: DiffusionOptions) -> Self {
        Self { diffuser: Diffuser::new(field), opts, directions, cache: Some(MapCache::default()) }
    }

    pub fn cache_budget(mut self, budget: usize) -> Self {
        self.cache = Some(MapCache::new(budget));
        self
    }

    /// Recompute every diffusion map instead of caching per cell.
    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn cache(&self) -> Option<&MapCache<D>> {
        self.cache.as_ref()
    }

    pub fn directions(&self) -> &[[f64; D]] {
        &self.directions
    }

    pub fn field(&self) -> &ThermalTransferField<D> {
        self.diffuser.field()
    }

    /// Diffusion map for a cell, truncated once the half-energy contour is closed.
    pub fn map_for(&self, cell: Cell<D>) -> Result<Arc<ThermalDiffusionMap<D>>> {
        let level = self.opts.e_eps / 2.0;
        let compute = || self.diffuser.diffuse_to_level(cell, &self.opts, level);
        match &self.cache {
            Some(cache) => cache.get_or_compute(cell, compute),
            None => compute().map(Arc::new),
        }
    }

    /// One slice centered at a grid-coordinate point.
    pub fn slice_at(&self, center: [f64; D]) -> Result<EquipotentialLine<D>> {
        let grid = &self.diffuser.field().grid;
        let cell = grid
            .nearest_cell(&center)
            .ok_or(Error::OutsideGrid { x: center[0], y: if D > 1 { center[1] } else { 0.0 } })?;
        let map = self.map_for(cell)?;
        // Rays are cast from the seed cell, where the map peaks. Sampling it off
        // center would mix in unseeded neighbors and can collapse the slice.
        let seed: [f64; D] = std::array::from_fn(|i| cell[i] as f64);
        let mut line = extract_equipotential_along(&map, seed, &self.directions)?;
        line.center = center;
        Ok(line)
    }

    /// Tube for a trajectory given in scene coordinates.
    pub fn build(&self, traj: &Trajectory<D>) -> Result<Tube<D>> {
        let grid = self.diffuser.field().grid;
        let slices = traj
            .points
            .iter()
            .map(|p| self.slice_at(grid.to_grid(p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Tube { trajectory_id: traj.id.clone(), slices, directions: self.directions.clone() })
    }

    /// Tubes for many trajectories, in input order.
    pub fn build_all(&self, trajs: &[Trajectory<D>]) -> Result<Vec<Tube<D>>>
    where
        Self: Sync,
    {
        par::map_indices(trajs.len(), |i| self.build(&trajs[i])).into_iter().collect()
    }
}

/// One-off 2D tube build.
pub fn build_tube(
    field: &ThermalTransferField<2>,
    traj: &Trajectory<2>,
    n_dirs: usize,
    opts: DiffusionOptions,
) -> Result<Tube<2>> {
    TubeBuilder::planar(field, n_dirs, opts)?.build(traj)
}

/// Quad-strip mesh in (x, y, n) space; coordinates in cells, time as sample index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeMesh {
    pub trajectory_id: String,
    pub vertices: Vec<[f64; 3]>,
    pub quads: Vec<[usize; 4]>,
}

pub fn tube_mesh(tube: &Tube<2>) -> Result<TubeMesh> {
    if tube.is_empty() {
        return Err(Error::invalid("cannot mesh an empty tube"));
    }
    let nw = tube.directions.len();
    let mut vertices = Vec::with_capacity(tube.len() * nw);
    for (n, slice) in tube.slices.iter().enumerate() {
        for (r, d) in slice.radii.iter().zip(&tube.directions) {
            vertices.push([slice.center[0] + r * d[0], slice.center[1] + r * d[1], n as f64]);
        }
    }
    let mut quads = Vec::with_capacity(tube.len().saturating_sub(1) * nw);
    for n in 1..tube.len() {
        let (a, b) = ((n - 1) * nw, n * nw);
        for j in 0..nw {
            let k = (j + 1) % nw;
            quads.push([a + j, a + k, b + k, b + j]);
        }
    }
    Ok(TubeMesh { trajectory_id: tube.trajectory_id.clone(), vertices, quads })
}

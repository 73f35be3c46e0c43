//! Regular scene grids and the axis direction set used by the transfer fields.
//!
//! Everything downstream of ingestion works in *grid coordinates*: cell `c`
//! along an axis has its center at coordinate `c`, so the continuous domain of
//! a grid with `n` cells along an axis is `[0, n - 1]`. Scene coordinates map
//! to grid coordinates through `origin` and `cell_size`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default resolution of the longest grid axis when the grid is inferred from data.
pub const DEFAULT_MAX_CELLS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<const D: usize> {
    pub dims: [usize; D],
    pub cell_size: f64,
    pub origin: [f64; D],
}

pub type SceneGrid = Grid<2>;
pub type VolumeGrid = Grid<3>;

pub type Cell<const D: usize> = [usize; D];

impl<const D: usize> Grid<D> {
    pub fn new(dims: [usize; D], cell_size: f64) -> Result<Self> {
        Self::with_origin(dims, cell_size, [0.0; D])
    }

    pub fn with_origin(dims: [usize; D], cell_size: f64, origin: [f64; D]) -> Result<Self> {
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::invalid(format!("grid dims {dims:?}: every axis needs >= 2 cells")));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::invalid(format!("cell size {cell_size} must be positive")));
        }
        Ok(Self { dims, cell_size, origin })
    }

    /// Smallest grid whose longest axis has `max_cells` cells and which covers
    /// every point with one cell of margin on each side.
    pub fn fit_to_points<'a, I>(points: I, max_cells: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64; D]>,
    {
        let mut lo = [f64::INFINITY; D];
        let mut hi = [f64::NEG_INFINITY; D];
        for p in points {
            for i in 0..D {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        if lo.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("cannot infer a grid from zero points"));
        }
        let max_cells = max_cells.max(4);
        let span = (0..D).map(|i| hi[i] - lo[i]).fold(0.0_f64, f64::max);
        let span = if span > 0.0 { span } else { 1.0 };
        // One cell of margin on each side of the longest axis.
        let cell_size = span / (max_cells - 3) as f64;
        let mut dims = [0usize; D];
        let mut origin = [0.0; D];
        for i in 0..D {
            let n = (((hi[i] - lo[i]) / cell_size).ceil() as usize + 3).clamp(2, max_cells);
            dims[i] = n;
            origin[i] = lo[i] - cell_size;
        }
        Self::with_origin(dims, cell_size, origin)
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index, x fastest (row-major for 2D).
    #[inline]
    pub fn index(&self, cell: Cell<D>) -> usize {
        let mut idx = 0;
        for i in (0..D).rev() {
            idx = idx * self.dims[i] + cell[i];
        }
        idx
    }

    #[inline]
    pub fn cell_of(&self, mut idx: usize) -> Cell<D> {
        let mut cell = [0; D];
        for i in 0..D {
            cell[i] = idx % self.dims[i];
            idx /= self.dims[i];
        }
        cell
    }

    pub fn to_grid(&self, p: &[f64; D]) -> [f64; D] {
        std::array::from_fn(|i| (p[i] - self.origin[i]) / self.cell_size)
    }

    pub fn to_scene(&self, g: &[f64; D]) -> [f64; D] {
        std::array::from_fn(|i| g[i] * self.cell_size + self.origin[i])
    }

    /// True if a grid-coordinate point lies inside `[0, n-1]` on every axis.
    pub fn contains(&self, g: &[f64; D]) -> bool {
        (0..D).all(|i| g[i] >= 0.0 && g[i] <= (self.dims[i] - 1) as f64)
    }

    /// Clamp a scene-coordinate point into the grid. Returns whether it moved.
    pub fn clamp_scene(&self, p: &mut [f64; D]) -> bool {
        let mut moved = false;
        for i in 0..D {
            let hi = self.origin[i] + (self.dims[i] - 1) as f64 * self.cell_size;
            let c = p[i].clamp(self.origin[i], hi);
            if c != p[i] {
                moved = true;
                p[i] = c;
            }
        }
        moved
    }

    /// Cell containing a grid-coordinate point (nearest cell center).
    pub fn nearest_cell(&self, g: &[f64; D]) -> Option<Cell<D>> {
        if !self.contains(g) {
            return None;
        }
        Some(std::array::from_fn(|i| (g[i].round() as usize).min(self.dims[i] - 1)))
    }

    /// Length of the grid diagonal in cells.
    pub fn diagonal(&self) -> f64 {
        self.dims.iter().map(|&n| ((n - 1) as f64).powi(2)).sum::<f64>().sqrt()
    }

    /// Distance from `g` along unit vector `dir` to the grid boundary.
    pub fn distance_to_boundary(&self, g: &[f64; D], dir: &[f64; D]) -> f64 {
        let mut t = f64::INFINITY;
        for i in 0..D {
            let hi = (self.dims[i] - 1) as f64;
            if dir[i] > 1e-15 {
                t = t.min((hi - g[i]) / dir[i]);
            } else if dir[i] < -1e-15 {
                t = t.min(-g[i] / dir[i]);
            }
        }
        t.max(0.0)
    }
}

/// Axis propagation direction: `axis` 0 = x, 1 = y, 2 = z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction {
    pub axis: usize,
    pub positive: bool,
}

/// Axes in direction-set order: y first, then x, then z.
const AXIS_ORDER: [usize; 3] = [1, 0, 2];

impl Direction {
    /// Ordered direction set: `[y-, y+, x-, x+]` in 2D, `[y-, y+, x-, x+, z-, z+]` in 3D.
    pub fn all<const D: usize>() -> Vec<Direction> {
        AXIS_ORDER
            .iter()
            .filter(|&&axis| axis < D)
            .flat_map(|&axis| [Direction { axis, positive: false }, Direction { axis, positive: true }])
            .collect()
    }

    pub fn count<const D: usize>() -> usize {
        2 * D
    }

    /// Position of this direction in [`Direction::all`].
    #[inline]
    pub fn index(self) -> usize {
        let rank = AXIS_ORDER.iter().position(|&a| a == self.axis).expect("axis < 3");
        2 * rank + self.positive as usize
    }

    pub fn unit<const D: usize>(self) -> [f64; D] {
        let mut v = [0.0; D];
        v[self.axis] = if self.positive { 1.0 } else { -1.0 };
        v
    }

    pub fn label(self) -> &'static str {
        match (self.axis, self.positive) {
            (0, false) => "x-",
            (0, true) => "x+",
            (1, false) => "y-",
            (1, true) => "y+",
            (2, false) => "z-",
            _ => "z+",
        }
    }

    /// Snap a neighbor offset to the nearest axis direction. Ties between axes
    /// resolve in direction-set order (vertical before horizontal before depth).
    #[inline]
    pub fn snap<const D: usize>(offset: &[i64; D]) -> Direction {
        let mut best: Option<(usize, i64)> = None;
        for &axis in AXIS_ORDER.iter().filter(|&&a| a < D) {
            let m = offset[axis].abs();
            if m > 0 && best.is_none_or(|(_, bm)| m > bm) {
                best = Some((axis, m));
            }
        }
        let (axis, _) = best.expect("snap of a zero offset");
        Direction { axis, positive: offset[axis] > 0 }
    }
}

/// Unit-vector directions used to sample equipotential lines in 2D: angle
/// `2*pi*b/n` for `b = 1..=n`.
pub fn ring_directions(n: usize) -> Vec<[f64; 2]> {
    (1..=n)
        .map(|b| {
            let a = std::f64::consts::TAU * b as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// The 26 normalized offsets of a 3x3x3 neighborhood, z-major then y then x.
pub fn sphere_directions_26() -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(26);
    for dz in -1i32..=1 {
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let n = ((dx * dx + dy * dy + dz * dz) as f64).sqrt();
                out.push([dx as f64 / n, dy as f64 / n, dz as f64 / n]);
            }
        }
    }
    out
}

/// Vertices of a once-subdivided icosahedron (42 directions).
pub fn sphere_directions_ico42() -> Vec<[f64; 3]> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let normalize = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    for v in verts.iter_mut() {
        *v = normalize(*v);
    }
    // Edge midpoints: icosahedron edges join vertices at the minimal distance.
    let base = verts.clone();
    let d2 = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>();
    let edge = d2(&base[0], &base[1]);
    for i in 0..base.len() {
        for j in (i + 1)..base.len() {
            if (d2(&base[i], &base[j]) - edge).abs() < 1e-9 {
                let m = std::array::from_fn(|k| (base[i][k] + base[j][k]) / 2.0);
                verts.push(normalize(m));
            }
        }
    }
    verts
}

#[inline]
pub(crate) fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    (0..D).map(|i| a[i] * b[i]).sum()
}

#[inline]
pub(crate) fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn sub<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| a[i] - b[i])
}

#[inline]
pub(crate) fn dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    norm(&sub(a, b))
}

//! Ring-propagation thermal diffusion and equipotential extraction.
//!
//! Energy starts at `E_eps` on the seed cell and sweeps outward one Chebyshev
//! ring at a time. A cell on ring `t` takes the mean, over its already-computed
//! neighbors on ring `t - 1`, of `E(p') * exp(-|p - p'| / k(p, dir(p - p')))`,
//! where `dir` snaps the neighbor offset to the nearest axis direction. Every
//! cell is computed exactly once, so the map is a pure function of the field
//! and the seed cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ThermalTransferField;
use crate::grid::{Cell, Direction, Grid};

pub const DEFAULT_E_EPS: f64 = 100.0;
pub const DEFAULT_N_DIRS: usize = 36;

/// March step and bisection tolerance for equipotential rays, in cells.
pub const MARCH_STEP: f64 = 0.25;
pub const BISECT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborRule {
    /// Average over computed inner neighbors only.
    #[default]
    Inner,
    /// Divide by the full in-grid neighbor count, counting outer neighbors as zero.
    AllNeighbors,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionOptions {
    pub e_eps: f64,
    pub rule: NeighborRule,
}

impl Default for DiffusionOptions {
    fn default() -> Self {
        Self { e_eps: DEFAULT_E_EPS, rule: NeighborRule::Inner }
    }
}

/// Energy grid seeded at one cell. Only the window `[lo, hi]` is stored;
/// cells outside it hold zero energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalDiffusionMap<const D: usize = 2> {
    pub grid: Grid<D>,
    pub seed: Cell<D>,
    pub e_eps: f64,
    pub lo: Cell<D>,
    pub hi: Cell<D>,
    energies: Vec<f64>,
}

impl<const D: usize> ThermalDiffusionMap<D> {
    fn window_dims(&self) -> [usize; D] {
        std::array::from_fn(|i| self.hi[i] - self.lo[i] + 1)
    }

    #[inline]
    pub fn energy(&self, cell: Cell<D>) -> f64 {
        let wd = self.window_dims();
        let mut idx = 0;
        for i in (0..D).rev() {
            if cell[i] < self.lo[i] || cell[i] > self.hi[i] {
                return 0.0;
            }
            idx = idx * wd[i] + (cell[i] - self.lo[i]);
        }
        self.energies[idx]
    }

    /// True if the stored window covers the whole grid.
    pub fn is_complete(&self) -> bool {
        (0..D).all(|i| self.lo[i] == 0 && self.hi[i] == self.grid.dims[i] - 1)
    }

    /// Energies on the full grid (x fastest).
    pub fn full_energies(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|idx| self.energy(self.grid.cell_of(idx))).collect()
    }

    /// Multilinear interpolation at a grid-coordinate point inside the grid.
    pub fn sample(&self, g: &[f64; D]) -> f64 {
        let mut base = [0usize; D];
        let mut frac = [0.0; D];
        for i in 0..D {
            let b = (g[i].floor().max(0.0) as usize).min(self.grid.dims[i] - 2);
            base[i] = b;
            frac[i] = (g[i] - b as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << D) {
            let mut w = 1.0;
            let mut c = base;
            for i in 0..D {
                if corner >> i & 1 == 1 {
                    c[i] += 1;
                    w *= frac[i];
                } else {
                    w *= 1.0 - frac[i];
                }
            }
            if w != 0.0 {
                acc += w * self.energy(c);
            }
        }
        acc
    }

    /// Build a map from explicit full-grid energies (used for synthetic maps and tests).
    pub fn from_energies(grid: Grid<D>, seed: Cell<D>, e_eps: f64, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != grid.len() {
            return Err(Error::Shape(format!("{} energies for a grid of {} cells", energies.len(), grid.len())));
        }
        Ok(Self { grid, seed, e_eps, lo: [0; D], hi: std::array::from_fn(|i| grid.dims[i] - 1), energies })
    }
}

/// Chebyshev distance between two cells.
#[inline]
pub fn ring_index<const D: usize>(a: &Cell<D>, b: &Cell<D>) -> usize {
    (0..D).map(|i| a[i].abs_diff(b[i])).max().unwrap_or(0)
}

/// Neighbor offsets of the `3^D - 1` neighborhood, with their lengths and the
/// snapped direction of propagation `-offset` (from neighbor to cell).
struct Offsets<const D: usize> {
    delta: Vec<[i64; D]>,
    length: Vec<f64>,
    dir: Vec<usize>,
}

impl<const D: usize> Offsets<D> {
    fn new() -> Self {
        let mut delta = Vec::new();
        let total = 3usize.pow(D as u32);
        for code in 0..total {
            let mut c = code;
            let o: [i64; D] = std::array::from_fn(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            });
            if o.iter().any(|&v| v != 0) {
                delta.push(o);
            }
        }
        let length = delta.iter().map(|o| (o.iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt()).collect();
        let dir = delta.iter().map(|o| Direction::snap(&o.map(|v| -v)).index()).collect();
        Self { delta, length, dir }
    }
}

/// Precomputed per-cell attenuations `exp(-|o| / k(p, dir))` for one field.
pub struct Diffuser<'a, const D: usize> {
    field: &'a ThermalTransferField<D>,
    offsets: Offsets<D>,
    atten: Vec<f64>,
}

impl<'a, const D: usize> Diffuser<'a, D> {
    pub fn new(field: &'a ThermalTransferField<D>) -> Self {
        let offsets = Offsets::<D>::new();
        let n = field.grid.len();
        let m = offsets.delta.len();
        let mut atten = vec![0.0; n * m];
        for cell in 0..n {
            for o in 0..m {
                let k = field.k(cell, offsets.dir[o]);
                atten[cell * m + o] = (-(offsets.length[o] / k)).exp();
            }
        }
        Self { field, offsets, atten }
    }

    pub fn field(&self) -> &ThermalTransferField<D> {
        self.field
    }

    /// Full diffusion map over the whole grid.
    pub fn diffuse(&self, seed: Cell<D>, opts: &DiffusionOptions) -> Result<ThermalDiffusionMap<D>> {
        self.run(seed, opts, None)
    }

    /// Sweep only until a complete ring falls below `level`. Cells beyond that
    /// ring are reported as zero; by ring-max monotonicity they are below
    /// `level` anyway, so the `level` contour is unchanged.
    pub fn diffuse_to_level(
        &self,
        seed: Cell<D>,
        opts: &DiffusionOptions,
        level: f64,
    ) -> Result<ThermalDiffusionMap<D>> {
        self.run(seed, opts, Some(level))
    }

    fn run(&self, seed: Cell<D>, opts: &DiffusionOptions, level: Option<f64>) -> Result<ThermalDiffusionMap<D>> {
        let grid = self.field.grid;
        if (0..D).any(|i| seed[i] >= grid.dims[i]) {
            return Err(Error::invalid(format!("seed cell {seed:?} outside grid {:?}", grid.dims)));
        }
        if !(opts.e_eps > 0.0 && opts.e_eps.is_finite()) {
            return Err(Error::invalid(format!("initial energy {} must be positive", opts.e_eps)));
        }
        let dims = grid.dims;
        let m = self.offsets.delta.len();
        let mut energy = vec![0.0; grid.len()];
        energy[grid.index(seed)] = opts.e_eps;
        let max_ring = (0..D).map(|i| seed[i].max(dims[i] - 1 - seed[i])).max().unwrap_or(0);
        let mut last_ring = max_ring;

        for tau in 1..=max_ring {
            let mut ring_max = 0.0_f64;
            for_each_ring_cell(&dims, &seed, tau, |cell| {
                let idx = grid.index(cell);
                let mut sum = 0.0;
                let mut inner = 0usize;
                let mut in_grid = 0usize;
                for o in 0..m {
                    let d = &self.offsets.delta[o];
                    let mut q = [0usize; D];
                    let mut ok = true;
                    for i in 0..D {
                        let v = cell[i] as i64 + d[i];
                        if v < 0 || v >= dims[i] as i64 {
                            ok = false;
                            break;
                        }
                        q[i] = v as usize;
                    }
                    if !ok {
                        continue;
                    }
                    in_grid += 1;
                    if ring_index(&q, &seed) < tau {
                        inner += 1;
                        sum += energy[grid.index(q)] * self.atten[idx * m + o];
                    }
                }
                let denom = match opts.rule {
                    NeighborRule::Inner => inner,
                    NeighborRule::AllNeighbors => in_grid,
                };
                let e = if denom > 0 { sum / denom as f64 } else { 0.0 };
                energy[idx] = e;
                ring_max = ring_max.max(e);
            });
            if let Some(level) = level {
                if ring_max < level {
                    last_ring = tau;
                    break;
                }
            }
        }

        let lo: Cell<D> = std::array::from_fn(|i| seed[i].saturating_sub(last_ring));
        let hi: Cell<D> = std::array::from_fn(|i| (seed[i] + last_ring).min(dims[i] - 1));
        let energies = if (0..D).all(|i| lo[i] == 0 && hi[i] == dims[i] - 1) {
            energy
        } else {
            let wd: [usize; D] = std::array::from_fn(|i| hi[i] - lo[i] + 1);
            let total: usize = wd.iter().product();
            let mut out = Vec::with_capacity(total);
            for w in 0..total {
                let mut r = w;
                let c: Cell<D> = std::array::from_fn(|i| {
                    let v = r % wd[i] + lo[i];
                    r /= wd[i];
                    v
                });
                out.push(energy[grid.index(c)]);
            }
            out
        };
        Ok(ThermalDiffusionMap { grid, seed, e_eps: opts.e_eps, lo, hi, energies })
    }
}

/// Convenience wrapper that builds a one-off [`Diffuser`].
pub fn diffuse<const D: usize>(
    field: &ThermalTransferField<D>,
    seed: Cell<D>,
    opts: &DiffusionOptions,
) -> Result<ThermalDiffusionMap<D>> {
    Diffuser::new(field).diffuse(seed, opts)
}

/// Visit each in-grid cell at Chebyshev distance exactly `tau` from `seed`.
/// Each cell is assigned to the lowest axis on which it sits on the ring face.
fn for_each_ring_cell<const D: usize>(dims: &[usize; D], seed: &Cell<D>, tau: usize, mut f: impl FnMut(Cell<D>)) {
    for axis in 0..D {
        for side in [-1i64, 1] {
            let c = seed[axis] as i64 + side * tau as i64;
            if c < 0 || c >= dims[axis] as i64 {
                continue;
            }
            let mut lo = [0usize; D];
            let mut hi = [0usize; D];
            let mut empty = false;
            for j in 0..D {
                if j == axis {
                    lo[j] = c as usize;
                    hi[j] = c as usize;
                    continue;
                }
                let reach = if j < axis { tau as i64 - 1 } else { tau as i64 };
                let a = (seed[j] as i64 - reach).max(0);
                let b = (seed[j] as i64 + reach).min(dims[j] as i64 - 1);
                if a > b {
                    empty = true;
                    break;
                }
                lo[j] = a as usize;
                hi[j] = b as usize;
            }
            if empty {
                continue;
            }
            let mut cell = lo;
            'walk: loop {
                f(cell);
                let mut i = 0;
                loop {
                    if i == D {
                        break 'walk;
                    }
                    if cell[i] < hi[i] {
                        cell[i] += 1;
                        break;
                    }
                    cell[i] = lo[i];
                    i += 1;
                }
            }
        }
    }
}

/// Half-energy contour sampled as radial distances along fixed unit directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquipotentialLine<const D: usize = 2> {
    #[serde(with = "crate::io::array_serde")]
    pub center: [f64; D],
    pub level: f64,
    pub radii: Vec<f64>,
}

/// Radius along one ray: fixed-step march to the first sample below `level`,
/// then bisection. Clamped to the boundary distance when no crossing occurs.
pub fn ray_radius<const D: usize>(map: &ThermalDiffusionMap<D>, center: &[f64; D], dir: &[f64; D], level: f64) -> f64 {
    let at = |t: f64| -> f64 {
        let p: [f64; D] = std::array::from_fn(|i| center[i] + t * dir[i]);
        map.sample(&p)
    };
    if at(0.0) < level {
        return 0.0;
    }
    let boundary = map.grid.distance_to_boundary(center, dir);
    let mut prev = 0.0;
    loop {
        let t = (prev + MARCH_STEP).min(boundary);
        if t <= prev {
            return boundary;
        }
        if at(t) < level {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > BISECT_TOL {
                let mid = 0.5 * (lo + hi);
                if at(mid) < level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        if t >= boundary {
            return boundary;
        }
        prev = t;
    }
}

/// Half-energy radii around `center` (grid coordinates) along each of `dirs`.
pub fn extract_equipotential_along<const D: usize>(
    map: &ThermalDiffusionMap<D>,
    center: [f64; D],
    dirs: &[[f64; D]],
) -> Result<EquipotentialLine<D>> {
    if !map.grid.contains(&center) {
        return Err(Error::OutsideGrid { x: center[0], y: if D > 1 { center[1] } else { 0.0 } });
    }
    let level = map.e_eps / 2.0;
    let radii = dirs.iter().map(|d| ray_radius(map, &center, d, level)).collect();
    Ok(EquipotentialLine { center, level, radii })
}

/// 2D equipotential with `n_dirs` rays at angles `2 pi b / n_dirs`, `b = 1..=n_dirs`.
pub fn extract_equipotential(
    map: &ThermalDiffusionMap<2>,
    center: [f64; 2],
    n_dirs: usize,
) -> Result<EquipotentialLine<2>> {
    if n_dirs < 4 {
        return Err(Error::invalid(format!("need at least 4 equipotential directions, got {n_dirs}")));
    }
    extract_equipotential_along(map, center, &crate::grid::ring_directions(n_dirs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn uniform(w: usize, h: usize, k: f64) -> ThermalTransferField<2> {
        ThermalTransferField::uniform(Grid::new([w, h], 1.0).unwrap(), k)
    }

    #[test]
    fn ring_cells_are_exact_and_unique() {
        let dims = [9usize, 6];
        let seed = [2usize, 4];
        for tau in 1..9 {
            let mut seen = Vec::new();
            for_each_ring_cell(&dims, &seed, tau, |c| seen.push(c));
            let mut expect = Vec::new();
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    if ring_index(&[x, y], &seed) == tau {
                        expect.push([x, y]);
                    }
                }
            }
            seen.sort();
            expect.sort();
            assert_eq!(seen, expect, "tau {tau}");
        }
        let dims3 = [5usize, 4, 6];
        let seed3 = [1usize, 3, 2];
        for tau in 1..6 {
            let mut n = 0;
            for_each_ring_cell(&dims3, &seed3, tau, |c| {
                assert_eq!(ring_index(&c, &seed3), tau);
                n += 1;
            });
            let expect = (0..dims3.iter().product::<usize>())
                .filter(|&i| ring_index(&[i % 5, (i / 5) % 4, i / 20], &seed3) == tau)
                .count();
            assert_eq!(n, expect);
        }
    }

    #[test]
    fn seed_holds_initial_energy_and_bounds_hold() {
        let f = uniform(11, 9, 2.0);
        let map = diffuse(&f, [3, 4], &DiffusionOptions::default()).unwrap();
        assert_eq!(map.energy([3, 4]), 100.0);
        for e in map.full_energies() {
            assert!((0.0..=100.0).contains(&e));
        }
        assert!(map.is_complete());
    }

    #[test]
    fn uniform_field_is_dihedrally_symmetric() {
        let f = uniform(15, 15, 3.0);
        let map = diffuse(&f, [7, 7], &DiffusionOptions::default()).unwrap();
        for y in 0..15usize {
            for x in 0..15usize {
                let e = map.energy([x, y]);
                for (a, b) in [(14 - x, y), (x, 14 - y), (y, x), (14 - y, 14 - x)] {
                    assert!((e - map.energy([a, b])).abs() <= 1e-12 * e.max(1e-300), "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_seed_and_energy() {
        let f = uniform(5, 5, 1.0);
        assert!(diffuse(&f, [5, 0], &DiffusionOptions::default()).is_err());
        let opts = DiffusionOptions { e_eps: 0.0, ..Default::default() };
        assert!(diffuse(&f, [1, 1], &opts).is_err());
    }

    #[test]
    fn truncated_map_matches_full_map_contour() {
        let f = uniform(31, 31, 4.0);
        let d = Diffuser::new(&f);
        let opts = DiffusionOptions::default();
        let full = d.diffuse([12, 15], &opts).unwrap();
        let part = d.diffuse_to_level([12, 15], &opts, 50.0).unwrap();
        assert!(!part.is_complete());
        let a = extract_equipotential(&full, [12.3, 14.8], 36).unwrap();
        let b = extract_equipotential(&part, [12.3, 14.8], 36).unwrap();
        assert_eq!(a, b);
    }

    fn ramp_map(radius: f64) -> ThermalDiffusionMap<2> {
        let g = Grid::new([31, 31], 1.0).unwrap();
        let energies = (0..g.len())
            .map(|i| {
                let c = g.cell_of(i);
                let r = ((c[0] as f64 - 15.0).powi(2) + (c[1] as f64 - 15.0).powi(2)).sqrt();
                100.0 * (radius + 0.5 - r).clamp(0.0, 1.0)
            })
            .collect();
        ThermalDiffusionMap::from_energies(g, [15, 15], 100.0, energies).unwrap()
    }

    #[test]
    fn step_map_radius() {
        let line = extract_equipotential(&ramp_map(5.0), [15.0, 15.0], 36).unwrap();
        assert_eq!(line.radii.len(), 36);
        assert_eq!(line.level, 50.0);
        for r in &line.radii {
            assert!((r - 5.0).abs() <= 0.26, "radius {r}");
        }
    }

    #[test]
    fn no_crossing_clamps_to_boundary() {
        let g = Grid::new([11, 11], 1.0).unwrap();
        let map = ThermalDiffusionMap::from_energies(g, [5, 5], 100.0, vec![100.0; g.len()]).unwrap();
        let line = extract_equipotential(&map, [5.0, 5.0], 4).unwrap();
        for r in line.radii {
            assert!((r - 5.0).abs() < 1e-12);
        }
        assert!(extract_equipotential(&map, [11.0, 5.0], 4).is_err());
        assert!(extract_equipotential(&map, [5.0, 5.0], 3).is_err());
    }

    #[test]
    fn larger_coefficients_give_larger_radii() {
        let opts = DiffusionOptions::default();
        let small = diffuse(&uniform(41, 41, 2.0), [20, 20], &opts).unwrap();
        let large = diffuse(&uniform(41, 41, 5.0), [20, 20], &opts).unwrap();
        let a = extract_equipotential(&small, [20.0, 20.0], 36).unwrap();
        let b = extract_equipotential(&large, [20.0, 20.0], 36).unwrap();
        for (x, y) in a.radii.iter().zip(&b.radii) {
            assert!(y >= x);
        }
    }

    #[test]
    fn strict_rule_never_exceeds_inner_rule() {
        let f = uniform(13, 13, 3.0);
        let inner = diffuse(&f, [6, 6], &DiffusionOptions::default()).unwrap();
        let strict =
            diffuse(&f, [6, 6], &DiffusionOptions { rule: NeighborRule::AllNeighbors, ..Default::default() }).unwrap();
        for (a, b) in inner.full_energies().iter().zip(strict.full_energies()) {
            assert!(b <= *a + 1e-12);
        }
    }
}

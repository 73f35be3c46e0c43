//! Thermal transfer fields.
//!
//! A field holds one nonnegative coefficient per (cell, axis direction). It is
//! built from all trajectories of a scene, without regard to their labels:
//!
//! * density `rho(p) = sum_m sum_n exp(-|p - p_n^m| / (2 sigma^2))`
//! * directional velocity `u(p, a) = sum_m sum_n max(a . u_n^m, 0) exp(-|p - p_n^m| / (2 sigma^2))`
//! * coefficients `k(p, a) = kappa * sqrt(rho u) / sum_q sqrt(rho u)`, the
//!   minimizer of `sum eta rho u / k` subject to `k >= 0` and `sum_p k(p, a) = kappa`.
//!
//! The kernel takes the *unsquared* distance in its exponent; the squared form
//! is available through [`KernelOptions::squared`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Direction, Grid};
use crate::par;
use crate::trajectory::TrajectorySet;

/// Relative size of the coefficient floor and of the empty-direction fallback mass.
pub const FLOOR_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Bandwidth in cells.
    pub sigma: f64,
    /// Use `exp(-d^2 / 2 sigma^2)` instead of `exp(-d / 2 sigma^2)`.
    pub squared: bool,
    /// Ignore samples further than `truncate * sigma` cells. `None` sums exactly.
    pub truncate: Option<f64>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { sigma: 2.0, squared: false, truncate: Some(4.0) }
    }
}

impl KernelOptions {
    pub fn exact(sigma: f64) -> Self {
        Self { sigma, squared: false, truncate: None }
    }

    #[inline]
    pub fn eval(&self, d: f64) -> f64 {
        let s2 = 2.0 * self.sigma * self.sigma;
        if self.squared {
            (-(d * d) / s2).exp()
        } else {
            (-d / s2).exp()
        }
    }

    fn radius(&self) -> Option<f64> {
        self.truncate.map(|m| m * self.sigma)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma {} must be positive", self.sigma)));
        }
        if let Some(t) = self.truncate {
            if !(t > 0.0) {
                return Err(Error::invalid(format!("truncation multiple {t} must be positive")));
            }
        }
        Ok(())
    }
}

/// Nonnegative per-cell values on a grid (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<const D: usize> {
    pub grid: Grid<D>,
    pub values: Vec<f64>,
}

impl<const D: usize> ScalarField<D> {
    pub fn zeros(grid: Grid<D>) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn at(&self, cell: [usize; D]) -> f64 {
        self.values[self.grid.index(cell)]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Kernel samples: grid-coordinate positions with `m` weights each.
struct Samples<const D: usize> {
    pos: Vec<[f64; D]>,
    weights: Vec<f64>,
    m: usize,
}

fn collect_samples<const D: usize>(
    set: &TrajectorySet<D>,
    dirs: &[[f64; D]],
) -> Result<Samples<D>> {
    let grid = &set.grid;
    let m = dirs.len() + 1;
    let mut pos = Vec::new();
    let mut weights = Vec::new();
    for t in &set.trajectories {
        if t.len() < 2 {
            continue;
        }
        let vel = t.velocities()?;
        for (p, v) in t.points.iter().zip(&vel) {
            pos.push(grid.to_grid(p));
            weights.push(1.0);
            for a in dirs {
                // Speeds in cells per time unit.
                let proj: f64 = (0..D).map(|i| a[i] * v[i]).sum::<f64>() / grid.cell_size;
                weights.push(proj.max(0.0));
            }
        }
    }
    Ok(Samples { pos, weights, m })
}

/// Spatial hash of sample indices into square bins of `bin` cells.
struct Bins<const D: usize> {
    dims: [usize; D],
    bin: f64,
    members: Vec<Vec<u32>>,
}

impl<const D: usize> Bins<D> {
    fn new(grid: &Grid<D>, pos: &[[f64; D]], bin: f64) -> Self {
        let dims: [usize; D] = std::array::from_fn(|i| ((grid.dims[i] as f64 / bin).ceil() as usize).max(1));
        let total: usize = dims.iter().product();
        let mut members = vec![Vec::new(); total];
        for (k, p) in pos.iter().enumerate() {
            let b: [usize; D] =
                std::array::from_fn(|i| ((p[i] / bin).floor().max(0.0) as usize).min(dims[i] - 1));
            members[Self::flat(&dims, &b)].push(k as u32);
        }
        Self { dims, bin, members }
    }

    fn flat(dims: &[usize; D], b: &[usize; D]) -> usize {
        let mut idx = 0;
        for i in (0..D).rev() {
            idx = idx * dims[i] + b[i];
        }
        idx
    }

    /// Visit bins overlapping the box `[c - r, c + r]` in a fixed order.
    fn for_each_near(&self, c: &[f64; D], r: f64, mut f: impl FnMut(&[u32])) {
        let lo: [usize; D] =
            std::array::from_fn(|i| (((c[i] - r) / self.bin).floor().max(0.0) as usize).min(self.dims[i] - 1));
        let hi: [usize; D] =
            std::array::from_fn(|i| (((c[i] + r) / self.bin).floor().max(0.0) as usize).min(self.dims[i] - 1));
        let mut b = lo;
        loop {
            f(&self.members[Self::flat(&self.dims, &b)]);
            let mut i = 0;
            loop {
                if i == D {
                    return;
                }
                if b[i] < hi[i] {
                    b[i] += 1;
                    break;
                }
                b[i] = lo[i];
                i += 1;
            }
        }
    }
}

/// Gather `m` kernel-weighted sums per cell.
fn kernel_sums<const D: usize>(grid: &Grid<D>, samples: &Samples<D>, kernel: &KernelOptions) -> Vec<ScalarField<D>> {
    let m = samples.m;
    let per_cell: Vec<Vec<f64>> = match kernel.radius() {
        None => par::map_indices(grid.len(), |idx| {
            let c = grid.cell_of(idx).map(|v| v as f64);
            let mut acc = vec![0.0; m];
            for (k, p) in samples.pos.iter().enumerate() {
                let w = kernel.eval(crate::grid::dist(&c, p));
                for j in 0..m {
                    acc[j] += w * samples.weights[k * m + j];
                }
            }
            acc
        }),
        Some(r) => {
            let bins = Bins::new(grid, &samples.pos, r.max(1.0));
            par::map_indices(grid.len(), |idx| {
                let c = grid.cell_of(idx).map(|v| v as f64);
                let mut acc = vec![0.0; m];
                bins.for_each_near(&c, r, |members| {
                    for &k in members {
                        let k = k as usize;
                        let d = crate::grid::dist(&c, &samples.pos[k]);
                        if d <= r {
                            let w = kernel.eval(d);
                            for j in 0..m {
                                acc[j] += w * samples.weights[k * m + j];
                            }
                        }
                    }
                });
                acc
            })
        }
    };
    (0..m)
        .map(|j| ScalarField { grid: *grid, values: per_cell.iter().map(|acc| acc[j]).collect() })
        .collect()
}

/// Kernel density of all trajectory samples.
pub fn density_field<const D: usize>(set: &TrajectorySet<D>, kernel: &KernelOptions) -> Result<ScalarField<D>> {
    kernel.validate()?;
    let samples = collect_samples(set, &[])?;
    Ok(kernel_sums(&set.grid, &samples, kernel).swap_remove(0))
}

/// Kernel-weighted positive speed component along unit direction `a`.
pub fn directional_velocity_field<const D: usize>(
    set: &TrajectorySet<D>,
    kernel: &KernelOptions,
    a: [f64; D],
) -> Result<ScalarField<D>> {
    kernel.validate()?;
    let n = crate::grid::norm(&a);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("direction {a:?} is not a unit vector")));
    }
    let samples = collect_samples(set, &[a])?;
    Ok(kernel_sums(&set.grid, &samples, kernel).swap_remove(1))
}

/// Closed-form optimal coefficients for one direction: `kappa * sqrt(x) / sum sqrt(x)`
/// where `x = rho * u`. `None` if the direction has no support.
pub fn optimal_coefficients(rho_u: &[f64], kappa: f64) -> Option<Vec<f64>> {
    let roots: Vec<f64> = rho_u.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let total: f64 = roots.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return None;
    }
    Some(roots.into_iter().map(|r| kappa * r / total).collect())
}

/// Total transferred energy `sum_a sum_p eta * rho u / k`. Cells with zero flow
/// contribute 0; cells with flow but `k = 0` contribute infinity.
pub fn transfer_objective(coeffs: &[Vec<f64>], rho_u: &[Vec<f64>], eta: f64) -> Result<f64> {
    if coeffs.len() != rho_u.len() {
        return Err(Error::Shape(format!("{} coefficient directions vs {} flow directions", coeffs.len(), rho_u.len())));
    }
    let mut total = 0.0;
    for (k, x) in coeffs.iter().zip(rho_u) {
        if k.len() != x.len() {
            return Err(Error::Shape(format!("{} coefficients vs {} flow cells", k.len(), x.len())));
        }
        for (&k, &x) in k.iter().zip(x) {
            if x > 0.0 {
                total += if k > 0.0 { eta * x / k } else { f64::INFINITY };
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub kernel: KernelOptions,
    /// Per-direction coefficient mass; `None` means `W*H` (mean coefficient 1).
    pub kappa: Option<f64>,
    pub eta: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self { kernel: KernelOptions::default(), kappa: None, eta: 1.0 }
    }
}

/// Scene motion pattern: per-cell, per-direction transfer coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalTransferField<const D: usize = 2> {
    pub grid: Grid<D>,
    pub directions: Vec<Direction>,
    /// Direction-major: `coeffs[a * n_cells + cell]`.
    pub coeffs: Vec<f64>,
    pub kappa: f64,
    pub sigma: f64,
    pub eta: f64,
    pub squared_kernel: bool,
    /// Directions with no support that fell back to the uniform floor.
    pub empty_directions: Vec<Direction>,
}

pub type VolumetricField = ThermalTransferField<3>;

impl<const D: usize> ThermalTransferField<D> {
    #[inline]
    pub fn k(&self, cell_idx: usize, dir_idx: usize) -> f64 {
        self.coeffs[dir_idx * self.grid.len() + cell_idx]
    }

    pub fn direction_slice(&self, dir_idx: usize) -> &[f64] {
        let n = self.grid.len();
        &self.coeffs[dir_idx * n..(dir_idx + 1) * n]
    }

    /// A field with the same coefficient `k` everywhere.
    pub fn uniform(grid: Grid<D>, k: f64) -> Self {
        let directions = Direction::all::<D>();
        Self {
            coeffs: vec![k; grid.len() * directions.len()],
            kappa: k * grid.len() as f64,
            grid,
            directions,
            sigma: 0.0,
            eta: 1.0,
            squared_kernel: false,
            empty_directions: Vec::new(),
        }
    }

    /// Assemble a field from per-direction `rho * u` grids using the closed
    /// form, the empty-direction fallback and the renormalized floor.
    pub fn from_flows(grid: Grid<D>, rho_u: &[Vec<f64>], params: &FieldParams) -> Result<Self> {
        let directions = Direction::all::<D>();
        if rho_u.len() != directions.len() {
            return Err(Error::Shape(format!("expected {} flow grids, got {}", directions.len(), rho_u.len())));
        }
        let n = grid.len();
        let kappa = params.kappa.unwrap_or(n as f64);
        if !(kappa > 0.0) || !(params.eta > 0.0) {
            return Err(Error::invalid("kappa and eta must be positive"));
        }
        let k_min = FLOOR_FRACTION * kappa / n as f64;
        let renorm = kappa / (kappa + n as f64 * k_min);
        let mut coeffs = Vec::with_capacity(n * directions.len());
        let mut empty = Vec::new();
        for (dir, flow) in directions.iter().zip(rho_u) {
            if flow.len() != n {
                return Err(Error::Shape(format!("flow grid has {} cells, grid has {n}", flow.len())));
            }
            match optimal_coefficients(flow, kappa) {
                Some(k) => coeffs.extend(k.into_iter().map(|v| (v + k_min) * renorm)),
                None => {
                    empty.push(*dir);
                    coeffs.extend(std::iter::repeat_n(FLOOR_FRACTION * kappa / n as f64, n));
                }
            }
        }
        Ok(Self {
            grid,
            directions,
            coeffs,
            kappa,
            sigma: params.kernel.sigma,
            eta: params.eta,
            squared_kernel: params.kernel.squared,
            empty_directions: empty,
        })
    }
}

/// Density and per-direction velocity fields in direction-set order.
pub fn flow_fields<const D: usize>(
    set: &TrajectorySet<D>,
    kernel: &KernelOptions,
) -> Result<(ScalarField<D>, Vec<ScalarField<D>>)> {
    kernel.validate()?;
    let dirs: Vec<[f64; D]> = Direction::all::<D>().iter().map(|d| d.unit::<D>()).collect();
    let samples = collect_samples(set, &dirs)?;
    let mut sums = kernel_sums(&set.grid, &samples, kernel);
    let rho = sums.remove(0);
    Ok((rho, sums))
}

/// Build the optimal transfer field from every trajectory in `set`.
pub fn build_transfer_field<const D: usize>(
    set: &TrajectorySet<D>,
    params: &FieldParams,
) -> Result<ThermalTransferField<D>> {
    let (rho, vel) = flow_fields(set, &params.kernel)?;
    let rho_u: Vec<Vec<f64>> = vel
        .iter()
        .map(|u| rho.values.iter().zip(&u.values).map(|(r, u)| r * u).collect())
        .collect();
    let field = ThermalTransferField::from_flows(set.grid, &rho_u, params)?;
    if !field.empty_directions.is_empty() {
        log::debug!(
            "directions without support fell back to the floor: {:?}",
            field.empty_directions.iter().map(|d| d.label()).collect::<Vec<_>>()
        );
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Trajectory;

    fn grid(w: usize, h: usize) -> Grid<2> {
        Grid::new([w, h], 1.0).unwrap()
    }

    #[test]
    fn single_point_kernel() {
        let set = TrajectorySet::new(
            vec![Trajectory::new("a", vec![[5.0, 5.0], [5.0, 5.0]], 1.0)],
            grid(20, 20),
        )
        .unwrap();
        let k = KernelOptions::exact(2.0);
        let rho = density_field(&set, &k).unwrap();
        // Two coincident samples.
        assert!((rho.at([5, 5]) - 2.0).abs() < 1e-12);
        assert!((rho.at([8, 9]) - 2.0 * (-5.0f64 / 8.0).exp()).abs() < 1e-12);
        let far = KernelOptions::exact(0.5);
        assert!(density_field(&set, &far).unwrap().at([19, 19]) < 1e-6);
    }

    #[test]
    fn rectified_velocity() {
        let t = Trajectory::new("r", (0..10).map(|i| [i as f64 + 3.0, 8.0]).collect(), 1.0);
        let set = TrajectorySet::new(vec![t], grid(20, 16)).unwrap();
        let k = KernelOptions::default();
        let right = directional_velocity_field(&set, &k, [1.0, 0.0]).unwrap();
        let left = directional_velocity_field(&set, &k, [-1.0, 0.0]).unwrap();
        for x in 3..13 {
            assert!(right.at([x, 8]) > 0.0);
        }
        assert!(left.values.iter().all(|&v| v == 0.0));
        assert!(directional_velocity_field(&set, &k, [1.0, 1.0]).is_err());
    }

    #[test]
    fn diagonal_motion_is_symmetric_in_x_and_y() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t = Trajectory::new("d", (0..12).map(|i| [2.0 + i as f64 * s, 2.0 + i as f64 * s]).collect(), 1.0);
        let set = TrajectorySet::new(vec![t], grid(16, 16)).unwrap();
        let k = KernelOptions::default();
        let xp = directional_velocity_field(&set, &k, [1.0, 0.0]).unwrap();
        let yp = directional_velocity_field(&set, &k, [0.0, 1.0]).unwrap();
        for (a, b) in xp.values.iter().zip(&yp.values) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn uniform_flow_gives_uniform_coefficients() {
        let g = grid(8, 6);
        let flows = vec![vec![3.0; g.len()]; 4];
        let f = ThermalTransferField::from_flows(g, &flows, &FieldParams::default()).unwrap();
        for &c in &f.coeffs {
            assert!((c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_cell_toy_optimum() {
        let k = optimal_coefficients(&[1.0, 4.0], 3.0).unwrap();
        assert!((k[0] - 1.0).abs() < 1e-12 && (k[1] - 2.0).abs() < 1e-12);
        let obj = transfer_objective(&[k], &[vec![1.0, 4.0]], 1.0).unwrap();
        assert!((obj - 3.0).abs() < 1e-12);
        // brute-force over the simplex k0 + k1 = 3
        let best = (1..3000)
            .map(|i| {
                let k0 = 3.0 * i as f64 / 3000.0;
                1.0 / k0 + 4.0 / (3.0 - k0)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((3.0 - 1e-9..3.0 + 1e-4).contains(&best));
    }

    #[test]
    fn objective_edge_cases() {
        assert_eq!(transfer_objective(&[vec![0.0, 1.0]], &[vec![0.0, 0.0]], 1.0).unwrap(), 0.0);
        assert!(transfer_objective(&[vec![0.0, 1.0]], &[vec![1.0, 0.0]], 1.0).unwrap().is_infinite());
        assert!(transfer_objective(&[vec![0.0]], &[vec![1.0, 0.0]], 1.0).is_err());
    }

    #[test]
    fn per_direction_mass_is_kappa() {
        let t = Trajectory::new("r", (0..10).map(|i| [i as f64 + 3.0, 8.0 + 0.3 * i as f64]).collect(), 1.0);
        let set = TrajectorySet::new(vec![t], grid(20, 16)).unwrap();
        let f = build_transfer_field(&set, &FieldParams::default()).unwrap();
        assert_eq!(f.directions.len(), 4);
        for (a, d) in f.directions.iter().enumerate() {
            let total: f64 = f.direction_slice(a).iter().sum();
            if f.empty_directions.contains(d) {
                assert!((total - FLOOR_FRACTION * f.kappa).abs() < 1e-9);
            } else {
                assert!((total / f.kappa - 1.0).abs() < 1e-9);
            }
        }
        let labels: Vec<_> = f.empty_directions.iter().map(|d| d.label()).collect();
        assert_eq!(labels, ["y-", "x-"]);
        assert!(f.coeffs.iter().all(|&c| c > 0.0));
    }
}

//! Independent reference implementations. These deliberately avoid the
//! crate's internals: plain loops over every cell and every sample.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubelet::{Grid, ThermalTransferField, Trajectory, TrajectorySet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random trajectories with `len` points inside a `w x h` unit grid.
pub fn random_set(w: usize, h: usize, count: usize, len: usize, seed: u64) -> TrajectorySet<2> {
    let mut r = rng(seed);
    let trajs = (0..count)
        .map(|i| {
            let mut p = [r.random_range(0.0..(w - 1) as f64), r.random_range(0.0..(h - 1) as f64)];
            let pts = (0..len)
                .map(|_| {
                    let q = p;
                    p = [
                        (p[0] + r.random_range(-1.5..1.5)).clamp(0.0, (w - 1) as f64),
                        (p[1] + r.random_range(-1.5..1.5)).clamp(0.0, (h - 1) as f64),
                    ];
                    q
                })
                .collect();
            Trajectory::new(format!("t{i}"), pts, 1.0).with_label(format!("c{}", i % 3))
        })
        .collect();
    TrajectorySet::new(trajs, Grid::new([w, h], 1.0).unwrap()).unwrap()
}

/// `exp(-d / (2 sigma^2))` with `d` the Euclidean distance.
pub fn kernel(d: f64, sigma: f64) -> f64 {
    (-d / (2.0 * sigma * sigma)).exp()
}

/// Density by a double sum over all cells and all samples.
pub fn brute_density(set: &TrajectorySet<2>, sigma: f64) -> Vec<f64> {
    let [w, h] = set.grid.dims;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for t in &set.trajectories {
                for p in &t.points {
                    acc += kernel(((x as f64 - p[0]).powi(2) + (y as f64 - p[1]).powi(2)).sqrt(), sigma);
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Rectified directional velocity by a double sum. The last point reuses the
/// final segment's velocity.
pub fn brute_velocity(set: &TrajectorySet<2>, sigma: f64, a: [f64; 2]) -> Vec<f64> {
    let [w, h] = set.grid.dims;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for t in &set.trajectories {
                let n = t.points.len();
                for i in 0..n {
                    let (p0, p1) = if i + 1 < n { (t.points[i], t.points[i + 1]) } else { (t.points[n - 2], t.points[n - 1]) };
                    let v = [(p1[0] - p0[0]) / t.dt, (p1[1] - p0[1]) / t.dt];
                    let s = (a[0] * v[0] + a[1] * v[1]).max(0.0);
                    let p = t.points[i];
                    acc += s * kernel(((x as f64 - p[0]).powi(2) + (y as f64 - p[1]).powi(2)).sqrt(), sigma);
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Index into `[y-, y+, x-, x+, z-, z+]` of the axis direction nearest to
/// `v`. Ties prefer y, then x, then z.
pub fn snap_index(v: &[i64]) -> usize {
    let order = [1usize, 0, 2];
    let mut best = None;
    for (rank, &axis) in order.iter().enumerate() {
        if axis >= v.len() {
            continue;
        }
        let m = v[axis].abs();
        match best {
            Some((_, bm, _)) if m <= bm => {}
            _ if m == 0 => {}
            _ => best = Some((rank, m, v[axis] > 0)),
        }
    }
    let (rank, _, pos) = best.expect("non-zero offset");
    2 * rank + pos as usize
}

fn chebyshev(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap()
}

/// Straightforward ring diffusion over a grid of any dimension. Cells are
/// visited ring by ring by scanning the whole grid; each averages over its
/// neighbors with a smaller ring index (or, with `all_neighbors`, divides by
/// every in-grid neighbor).
pub fn naive_diffuse(dims: &[usize], k: impl Fn(&[usize], usize) -> f64, seed: &[usize], e_eps: f64, all_neighbors: bool) -> Vec<f64> {
    let d = dims.len();
    let total: usize = dims.iter().product();
    let coords = |mut i: usize| -> Vec<usize> {
        (0..d)
            .map(|a| {
                let v = i % dims[a];
                i /= dims[a];
                v
            })
            .collect()
    };
    let index = |c: &[usize]| -> usize { (0..d).rev().fold(0, |acc, a| acc * dims[a] + c[a]) };
    let mut e = vec![0.0; total];
    e[index(seed)] = e_eps;
    let max_ring = (0..total).map(|i| chebyshev(&coords(i), seed)).max().unwrap();
    for tau in 1..=max_ring {
        for i in 0..total {
            let p = coords(i);
            if chebyshev(&p, seed) != tau {
                continue;
            }
            let (mut sum, mut inner, mut all) = (0.0, 0usize, 0usize);
            for code in 0..3usize.pow(d as u32) {
                let mut c = code;
                let off: Vec<i64> = (0..d)
                    .map(|_| {
                        let v = (c % 3) as i64 - 1;
                        c /= 3;
                        v
                    })
                    .collect();
                if off.iter().all(|&v| v == 0) {
                    continue;
                }
                let q: Vec<i64> = (0..d).map(|a| p[a] as i64 + off[a]).collect();
                if (0..d).any(|a| q[a] < 0 || q[a] >= dims[a] as i64) {
                    continue;
                }
                all += 1;
                let q: Vec<usize> = q.into_iter().map(|v| v as usize).collect();
                if chebyshev(&q, seed) >= tau {
                    continue;
                }
                inner += 1;
                // Direction of propagation p - q.
                let dir: Vec<i64> = off.iter().map(|v| -v).collect();
                let len = (off.iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt();
                sum += e[index(&q)] * (-len / k(&p, snap_index(&dir))).exp();
            }
            let denom = if all_neighbors { all } else { inner };
            e[i] = if denom > 0 { sum / denom as f64 } else { 0.0 };
        }
    }
    e
}

/// Field with independent uniform random coefficients in `[lo, hi]`.
pub fn random_field<const D: usize>(dims: [usize; D], lo: f64, hi: f64, seed: u64) -> ThermalTransferField<D> {
    let grid = Grid::new(dims, 1.0).unwrap();
    let mut f = ThermalTransferField::uniform(grid, 1.0);
    let mut r = rng(seed);
    for c in f.coeffs.iter_mut() {
        *c = r.random_range(lo..hi);
    }
    f
}

/// Coefficient lookup for [`naive_diffuse`] on a crate field.
pub fn field_k<const D: usize>(f: &ThermalTransferField<D>) -> impl Fn(&[usize], usize) -> f64 + '_ {
    move |p, dir| {
        let cell: [usize; D] = std::array::from_fn(|i| p[i]);
        f.k(f.grid.index(cell), dir)
    }
}

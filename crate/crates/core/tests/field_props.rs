mod common;

use rand::Rng;
use tubelet::field::{flow_fields, optimal_coefficients};
use tubelet::{
    build_transfer_field, density_field, directional_velocity_field, transfer_objective, FieldParams, Grid,
    KernelOptions, Trajectory, TrajectorySet,
};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Moves mass between random cell pairs inside each direction, keeping every
/// coefficient nonnegative and each direction's total fixed.
fn perturb(k: &[Vec<f64>], r: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut out = k.to_vec();
    for dir in out.iter_mut() {
        let moves = r.random_range(1..6);
        for _ in 0..moves {
            let i = r.random_range(0..dir.len());
            let j = r.random_range(0..dir.len());
            if i == j {
                continue;
            }
            let delta = dir[i] * r.random_range(0.0..1.0);
            dir[i] -= delta;
            dir[j] += delta;
        }
    }
    out
}

#[test]
fn closed_form_beats_random_feasible_perturbations_2d() {
    for g in 0..10u64 {
        let mut r = common::rng(g);
        let n = 16 * 16;
        let kappa = n as f64;
        let rho_u: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n).map(|_| if r.random_bool(0.2) { 0.0 } else { r.random_range(0.0..5.0) }).collect())
            .collect();
        let k: Vec<Vec<f64>> = rho_u.iter().map(|x| optimal_coefficients(x, kappa).unwrap()).collect();
        let best = transfer_objective(&k, &rho_u, 1.0).unwrap();
        for _ in 0..1000 {
            let p = perturb(&k, &mut r);
            for (a, b) in p.iter().zip(&k) {
                assert!(rel_close(a.iter().sum(), b.iter().sum(), 1e-12));
            }
            let j = transfer_objective(&p, &rho_u, 1.0).unwrap();
            assert!(j - best >= -1e-9 * best, "grid {g}: perturbed {j} < optimal {best}");
        }
    }
}

#[test]
fn closed_form_beats_random_feasible_perturbations_3d() {
    for g in 0..10u64 {
        let mut r = common::rng(100 + g);
        let n = 6 * 6 * 6;
        let rho_u: Vec<Vec<f64>> = (0..6).map(|_| (0..n).map(|_| r.random_range(0.0..3.0)).collect()).collect();
        let k: Vec<Vec<f64>> = rho_u.iter().map(|x| optimal_coefficients(x, n as f64).unwrap()).collect();
        let best = transfer_objective(&k, &rho_u, 1.0).unwrap();
        for _ in 0..1000 {
            let j = transfer_objective(&perturb(&k, &mut r), &rho_u, 1.0).unwrap();
            assert!(j - best >= -1e-9 * best);
        }
    }
}

#[test]
fn field_sums_to_kappa_per_direction() {
    let set = common::random_set(20, 16, 10, 12, 4);
    let f = build_transfer_field(&set, &FieldParams::default()).unwrap();
    for a in 0..4 {
        let s: f64 = f.direction_slice(a).iter().sum();
        assert!(rel_close(s, f.kappa, 1e-9), "direction {a}: {s} vs {}", f.kappa);
        assert!(f.direction_slice(a).iter().all(|&k| k > 0.0 && k.is_finite()));
    }
}

#[test]
fn speed_scaling_scales_flow_but_not_coefficients() {
    let set = common::random_set(24, 24, 12, 15, 7);
    let kernel = KernelOptions::default();
    for c in [0.25, 3.0, 10.0] {
        let mut fast = set.clone();
        for t in fast.trajectories.iter_mut() {
            t.dt /= c;
        }
        let (_, u1) = flow_fields(&set, &kernel).unwrap();
        let (_, u2) = flow_fields(&fast, &kernel).unwrap();
        for (a, b) in u1.iter().zip(&u2) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(rel_close(c * x, *y, 1e-9));
            }
        }
        let k1 = build_transfer_field(&set, &FieldParams::default()).unwrap();
        let k2 = build_transfer_field(&fast, &FieldParams::default()).unwrap();
        for (x, y) in k1.coeffs.iter().zip(&k2.coeffs) {
            assert!(rel_close(*x, *y, 1e-9), "{x} vs {y}");
        }
    }
}

#[test]
fn relabeling_leaves_field_bit_identical() {
    let set = common::random_set(24, 24, 15, 15, 8);
    let base = build_transfer_field(&set, &FieldParams::default()).unwrap();
    let mut relabeled = set.clone();
    let n = relabeled.trajectories.len();
    for (i, t) in relabeled.trajectories.iter_mut().enumerate() {
        t.label = Some(format!("other{}", (i * 7 + 3) % n));
    }
    let mut unlabeled = set.clone();
    for t in unlabeled.trajectories.iter_mut() {
        t.label = None;
    }
    assert_eq!(base, build_transfer_field(&relabeled, &FieldParams::default()).unwrap());
    assert_eq!(base, build_transfer_field(&unlabeled, &FieldParams::default()).unwrap());
}

#[test]
fn kernel_fields_match_double_sums() {
    let set = common::random_set(32, 32, 30, 12, 11);
    let kernel = KernelOptions::exact(2.0);
    let rho = density_field(&set, &kernel).unwrap();
    let oracle = common::brute_density(&set, 2.0);
    for (a, b) in rho.values.iter().zip(&oracle) {
        assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
    }
    for a in [[1.0, 0.0], [0.0, -1.0], [0.6, 0.8]] {
        let u = directional_velocity_field(&set, &kernel, a).unwrap();
        let oracle = common::brute_velocity(&set, 2.0, a);
        for (x, y) in u.values.iter().zip(&oracle) {
            assert!(rel_close(*x, *y, 1e-9), "{x} vs {y}");
        }
    }
}

#[test]
fn truncated_kernel_stays_close_to_exact() {
    let set = common::random_set(32, 32, 30, 12, 12);
    let exact = density_field(&set, &KernelOptions::exact(2.0)).unwrap();
    let cut = density_field(&set, &KernelOptions::default()).unwrap();
    // Samples beyond 8 cells weigh at most exp(-1) each, so only a loose bound holds.
    for (a, b) in exact.values.iter().zip(&cut.values) {
        assert!(b <= a && *b >= 0.0);
    }
}

#[test]
fn volumetric_kernel_fields_match_double_sums() {
    let mut r = common::rng(5);
    let trajs: Vec<Trajectory<3>> = (0..8)
        .map(|i| {
            let pts = (0..10).map(|_| [r.random_range(0.0..9.0), r.random_range(0.0..9.0), r.random_range(0.0..9.0)]).collect();
            Trajectory::new(format!("v{i}"), pts, 1.0)
        })
        .collect();
    let set = TrajectorySet::new(trajs, Grid::new([10, 10, 10], 1.0).unwrap()).unwrap();
    let kernel = KernelOptions::exact(1.5);
    let rho = density_field(&set, &kernel).unwrap();
    let a = [0.0, 0.0, 1.0];
    let u = directional_velocity_field(&set, &kernel, a).unwrap();
    for idx in 0..1000 {
        let c = set.grid.cell_of(idx).map(|v| v as f64);
        let (mut dr, mut du) = (0.0, 0.0);
        for t in &set.trajectories {
            let v = t.velocities().unwrap();
            for (p, v) in t.points.iter().zip(&v) {
                let d = ((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2) + (c[2] - p[2]).powi(2)).sqrt();
                let w = common::kernel(d, 1.5);
                dr += w;
                du += w * (a[0] * v[0] + a[1] * v[1] + a[2] * v[2]).max(0.0);
            }
        }
        assert!(rel_close(rho.values[idx], dr, 1e-9));
        assert!(rel_close(u.values[idx], du, 1e-9));
    }
}

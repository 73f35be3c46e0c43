//! Acceptance criteria 1-11. Each test writes one `criterion N: PASS|FAIL`
//! line straight to stderr so the lines survive output capture.
//!
//! Dataset reproduction (criterion 10) runs only when the environment points
//! at local copies:
//!
//! - `TUBELET_VMT`: labeled trajectory file (JSONL or CSV) for clustering.
//! - `TUBELET_CROSS`: directory with `train.jsonl` (normal, labeled) and
//!   `test.jsonl`, where abnormal test trajectories carry the label `abnormal`.
//! - `TUBELET_MSR`: skeleton JSONL written by `tubelet action3d convert`; ids of the
//!   form `aXX_sYY_eZZ`, odd subjects train and even subjects test.

mod common;

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;
use tubelet::action3d::{gestures, read_skeletons, run_action_recognition, ActionConfig, SkeletonSequence};
use tubelet::experiment::{droplet_cluster_accuracy, run_clustering, run_detection, ClusterMethod, Classifier};
use tubelet::field::optimal_coefficients;
use tubelet::io::{load_trajectories, TrajectoryFormat};
use tubelet::synth::{presets, random_walks, synth_scene};
use tubelet::{
    corrupt, density_field, diffuse, directional_velocity_field, flow_droplet, transfer_objective, CorruptMode,
    DiffusionOptions, DropletParams, EquipotentialLine, Grid, KernelOptions, NeighborRule, Pipeline, RunConfig,
    ThermalTransferField, Trajectory, TrajectorySet, Tube, TubeBuilder,
};

// Pinned tolerances and budgets.
const OPTIMALITY_REL_TOL: f64 = 1e-9;
const KERNEL_ORACLE_REL_TOL: f64 = 1e-9;
const DIFFUSION_ORACLE_TOL: f64 = 1e-12;
const CLOSED_FORM_TOL: f64 = 1e-12;
const VOLUME_ORACLE_TOL: f64 = 1e-12;
const MIN_INTERSECTION_ACCURACY: f64 = 0.95;
const MAX_NOISE_DROP: f64 = 0.08;
const MIN_DETECTION_RATE: f64 = 0.90;
const MAX_FALSE_POSITIVE_RATE: f64 = 0.25;
const MIN_GESTURE_ACCURACY: f64 = 0.90;
const VMT_TARGET: (f64, f64) = (0.938, 0.03);
const CROSS_CA_TARGET: (f64, f64) = (0.986, 0.015);
const CROSS_DR_TARGET: (f64, f64) = (0.913, 0.05);
const MSR_TARGET: (f64, f64) = (0.921, 0.03);

fn report(n: u32, pass: bool, elapsed: Duration, budget: Option<Duration>, detail: &str) {
    let within = budget.is_none_or(|b| elapsed <= b);
    let verdict = if pass && within { "PASS" } else { "FAIL" };
    let budget = budget.map_or(String::new(), |b| format!(" budget {:.0}s", b.as_secs_f64()));
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {n}: {verdict} ({detail}; {:.2}s{budget})", elapsed.as_secs_f64());
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(within, "criterion {n} exceeded its time budget: {:.2}s", elapsed.as_secs_f64());
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn criterion_01_field_optimality() {
    let t0 = Instant::now();
    let n = 16 * 16;
    let mut worst = f64::INFINITY;
    for g in 0..10u64 {
        let mut r = common::rng(g);
        let rho_u: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| r.random_range(0.0..10.0)).collect()).collect();
        let k: Vec<Vec<f64>> = rho_u.iter().map(|x| optimal_coefficients(x, n as f64).unwrap()).collect();
        let best = transfer_objective(&k, &rho_u, 1.0).unwrap();
        for _ in 0..1000 {
            let mut p = k.clone();
            for dir in p.iter_mut() {
                for _ in 0..r.random_range(1..8) {
                    let (i, j) = (r.random_range(0..n), r.random_range(0..n));
                    let delta = dir[i] * r.random_range(0.0..1.0);
                    dir[i] -= delta;
                    dir[j] += delta;
                }
            }
            let j = transfer_objective(&p, &rho_u, 1.0).unwrap();
            worst = worst.min((j - best) / best);
        }
    }
    report(
        1,
        worst >= -OPTIMALITY_REL_TOL,
        t0.elapsed(),
        Some(Duration::from_secs(10)),
        &format!("10 grids x 1000 perturbations, smallest relative gap {worst:.3e}"),
    );
}

#[test]
fn criterion_02_kernel_field_oracle() {
    let t0 = Instant::now();
    let set = common::random_set(32, 32, 30, 15, 2);
    let kernel = KernelOptions::exact(2.0);
    let mut worst = 0.0f64;
    let rho = density_field(&set, &kernel).unwrap();
    for (a, b) in rho.values.iter().zip(common::brute_density(&set, 2.0)) {
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
    }
    for a in [[0.0, -1.0], [0.0, 1.0], [-1.0, 0.0], [1.0, 0.0]] {
        let u = directional_velocity_field(&set, &kernel, a).unwrap();
        for (x, y) in u.values.iter().zip(common::brute_velocity(&set, 2.0, a)) {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
        }
    }
    report(
        2,
        worst <= KERNEL_ORACLE_REL_TOL,
        t0.elapsed(),
        Some(Duration::from_secs(30)),
        &format!("32x32, 30 trajectories, largest relative deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_03_diffusion_oracle() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for case in 0..50u64 {
        let f = common::random_field([15, 15], 0.05, 5.0, 300 + case);
        let mut r = common::rng(case);
        let seed = [r.random_range(0..15), r.random_range(0..15)];
        for rule in [NeighborRule::Inner, NeighborRule::AllNeighbors] {
            let fast = diffuse(&f, seed, &DiffusionOptions { e_eps: 100.0, rule }).unwrap().full_energies();
            let slow = common::naive_diffuse(&[15, 15], common::field_k(&f), &seed, 100.0, rule == NeighborRule::AllNeighbors);
            for (a, b) in fast.iter().zip(&slow) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    report(
        3,
        worst <= DIFFUSION_ORACLE_TOL,
        t0.elapsed(),
        Some(Duration::from_secs(30)),
        &format!("15x15, 50 fields, both neighbor rules, largest deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_04_diffusion_invariants() {
    let t0 = Instant::now();
    let mut violations = 0usize;
    for case in 0..200u64 {
        let mut r = common::rng(10_000 + case);
        let dims = [r.random_range(2..30), r.random_range(2..30)];
        let f = common::random_field(dims, 1e-3, 25.0, 20_000 + case);
        let seed = [r.random_range(0..dims[0]), r.random_range(0..dims[1])];
        let e = diffuse(&f, seed, &DiffusionOptions::default()).unwrap().full_energies();
        let mut ring_max = vec![0.0f64; dims[0].max(dims[1])];
        for (i, &v) in e.iter().enumerate() {
            if !(0.0..=100.0).contains(&v) {
                violations += 1;
            }
            let c = f.grid.cell_of(i);
            let t = c[0].abs_diff(seed[0]).max(c[1].abs_diff(seed[1]));
            ring_max[t] = ring_max[t].max(v);
        }
        violations += ring_max.windows(2).filter(|w| w[1] > w[0]).count();
    }
    report(4, violations == 0, t0.elapsed(), None, &format!("200 field/seed pairs, {violations} violations"));
}

#[test]
fn criterion_05_droplet_closed_forms() {
    let t0 = Instant::now();
    let tube = |len: usize, r: f64| Tube {
        trajectory_id: "c".into(),
        slices: (0..len)
            .map(|n| EquipotentialLine { center: [n as f64, 3.0], level: 50.0, radii: vec![r; 36] })
            .collect(),
        directions: tubelet::grid::ring_directions(36),
    };
    let mut worst = 0.0f64;
    for len in [2, 5, 17, 64] {
        for v_c in [0.5, 1.0, 3.0] {
            // Factor 1 everywhere: lambda1 = 0.
            let p = DropletParams { lambda1: 0.0, lambda2: 0.0, v_c, clamp: true };
            let d = flow_droplet(&tube(len, 4.0), &p).unwrap();
            worst = d.values.iter().fold(worst, |w, x| w.max((x - v_c).abs()));
            // Factor 0 everywhere: every radius below lambda1, clamped.
            let p = DropletParams { lambda1: 2.0, lambda2: 0.0, v_c, clamp: true };
            let d = flow_droplet(&tube(len, 1.5), &p).unwrap();
            worst = d.values.iter().fold(worst, |w, x| w.max((x - v_c / len as f64).abs()));
        }
    }
    report(5, worst <= CLOSED_FORM_TOL, t0.elapsed(), None, &format!("both limits, largest deviation {worst:.3e}"));
}

#[test]
fn criterion_06_synthetic_clustering() {
    let t0 = Instant::now();
    let mut intersection = 0.0;
    let (mut ours, mut ed) = (0.0, 0.0);
    for seed in 0..10u64 {
        let config = RunConfig { seed, ..RunConfig::default() };
        let set = synth_scene(&presets::intersection(30), seed).unwrap();
        intersection += droplet_cluster_accuracy(&set, 4, &config).unwrap() / 10.0;
        let set = synth_scene(&presets::adjacent_lanes(30), seed).unwrap();
        let out = run_clustering(&set, 3, &config, &[ClusterMethod::DropletSpectral, ClusterMethod::EdKmeans]).unwrap();
        ours += out[0].accuracy / 10.0;
        ed += out[1].accuracy / 10.0;
    }
    report(
        6,
        intersection >= MIN_INTERSECTION_ACCURACY && ed < ours,
        t0.elapsed(),
        Some(Duration::from_secs(120)),
        &format!("intersection droplet+SC {intersection:.3}; adjacent lanes droplet+SC {ours:.3} vs ED+Kmeans {ed:.3}"),
    );
}

#[test]
fn criterion_07_noise_robustness() {
    let t0 = Instant::now();
    let seeds = 5u64;
    let mut curve = [0.0f64; 4];
    for seed in 0..seeds {
        let config = RunConfig { seed, ..RunConfig::default() };
        let set = synth_scene(&presets::intersection(30), seed).unwrap();
        curve[0] += droplet_cluster_accuracy(&set, 4, &config).unwrap() / seeds as f64;
        for (i, level) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            let (noisy, _) = corrupt(&set, CorruptMode::Noise, level, seed + 7).unwrap();
            curve[i + 1] += droplet_cluster_accuracy(&noisy, 4, &config).unwrap() / seeds as f64;
        }
    }
    let monotone = curve.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let drop = curve[0] - curve[3];
    report(
        7,
        monotone && drop <= MAX_NOISE_DROP,
        t0.elapsed(),
        Some(Duration::from_secs(300)),
        &format!("mean accuracy at noise 0/1/2/3 cells: {curve:.3?}, drop {:.1} points", 100.0 * drop),
    );
}

#[test]
fn criterion_08_abnormality_detection() {
    let t0 = Instant::now();
    let (mut dr, mut fpr) = (Vec::new(), Vec::new());
    for seed in 0..3u64 {
        let config = RunConfig { seed, ..RunConfig::default() };
        let train = synth_scene(&presets::seven_routes(30), seed).unwrap();
        let normal = synth_scene(&presets::seven_routes(15), seed + 100).unwrap();
        let mut test = normal.trajectories.clone();
        let mut abnormal = vec![false; test.len()];
        test.extend(random_walks(&train.grid, 20, 40, 1.0, 0.8, seed + 200));
        abnormal.resize(test.len(), true);
        let r = run_detection(&train, &test, &abnormal, &config).unwrap();
        dr.push(r.rates.detection_rate);
        fpr.push(r.rates.false_positive_rate);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (dr_m, fpr_m) = (mean(&dr), mean(&fpr));
    report(
        8,
        dr_m >= MIN_DETECTION_RATE && fpr_m <= MAX_FALSE_POSITIVE_RATE,
        t0.elapsed(),
        Some(Duration::from_secs(120)),
        &format!("3 seeds, DR {dr:.3?} (mean {dr_m:.3}), FPR {fpr:.3?} (mean {fpr_m:.3})"),
    );
}

#[test]
fn criterion_09_lambda_sweep() {
    let t0 = Instant::now();
    // Narrow tubes: off-route walks through a learned scene.
    let set = synth_scene(&presets::intersection(30), 0).unwrap();
    let pipeline = Pipeline::fit(&set, &RunConfig::default()).unwrap();
    let walks = random_walks(&set.grid, 5, 40, 1.0, 0.8, 42);
    let tubes = pipeline.tubes(&walks).unwrap();
    let lambdas1 = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
    let mut monotone_l1 = true;
    let mut areas = Vec::new();
    for t in &tubes {
        let a: Vec<f64> = lambdas1
            .iter()
            .map(|&l1| flow_droplet(t, &DropletParams { lambda1: l1, ..DropletParams::default() }).unwrap().area())
            .collect();
        monotone_l1 &= a.windows(2).all(|w| w[1] <= w[0]);
        areas.push(a);
    }

    // Wide tube: a short eastward track on a strongly conductive field.
    let field = ThermalTransferField::uniform(Grid::new([41, 41], 1.0).unwrap(), 40.0);
    let track = Trajectory::new("east", (0..8).map(|i| [16.0 + i as f64, 20.0]).collect(), 1.0);
    let tube = TubeBuilder::planar(&field, 36, DiffusionOptions::default()).unwrap().build(&track).unwrap();
    // Rays 15..=19 surround -x, opposite the motion.
    let behind: Vec<f64> = [0.0, 0.1, 0.5]
        .iter()
        .map(|&l2| {
            let d = flow_droplet(&tube, &DropletParams { lambda2: l2, ..DropletParams::default() }).unwrap();
            d.values[15..20].iter().sum::<f64>() / 5.0
        })
        .collect();
    let shrinking = behind.windows(2).all(|w| w[1] < w[0]);
    report(
        9,
        monotone_l1 && shrinking,
        t0.elapsed(),
        None,
        &format!(
            "area over lambda1 {lambdas1:?} for first walk {:.4?}; rear-sector mean over lambda2 0/0.1/0.5 {behind:.4?} (mean radius {:.1})",
            areas[0],
            tube.mean_radius()
        ),
    );
}

fn within(value: f64, (target, tol): (f64, f64)) -> bool {
    (value - target).abs() <= tol
}

fn msr_subject(id: &str) -> Option<u32> {
    id.split('_').find_map(|p| p.strip_prefix('s')).and_then(|s| s.parse().ok())
}

#[test]
fn criterion_10_dataset_reproduction() {
    let t0 = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    let config = RunConfig::default();

    if let Ok(path) = std::env::var("TUBELET_VMT") {
        let path = Path::new(&path);
        let (set, _) = load_trajectories::<2>(path, TrajectoryFormat::from_path(path)).unwrap();
        let k = set.labels().len();
        let acc = droplet_cluster_accuracy(&set, k, &config).unwrap();
        pass &= within(acc, VMT_TARGET);
        notes.push(format!("VMT cluster accuracy {acc:.3}"));
    }
    if let Ok(dir) = std::env::var("TUBELET_CROSS") {
        let dir = Path::new(&dir);
        let (train, _) = load_trajectories::<2>(&dir.join("train.jsonl"), TrajectoryFormat::Jsonl).unwrap();
        let (test, _) = load_trajectories::<2>(&dir.join("test.jsonl"), TrajectoryFormat::Jsonl).unwrap();
        let abnormal: Vec<bool> = test.trajectories.iter().map(|t| t.label.as_deref() == Some("abnormal")).collect();
        let train = TrajectorySet::new(train.trajectories, test.grid).unwrap();
        let r = run_detection(&train, &test.trajectories, &abnormal, &config).unwrap();
        let ca = r.classification_accuracy.unwrap_or(0.0);
        pass &= within(ca, CROSS_CA_TARGET) && within(r.rates.detection_rate, CROSS_DR_TARGET);
        notes.push(format!("CROSS CA {ca:.3} DR {:.3}", r.rates.detection_rate));
    }
    if let Ok(path) = std::env::var("TUBELET_MSR") {
        let seqs = read_skeletons(Path::new(&path)).unwrap();
        let (train, test): (Vec<SkeletonSequence>, Vec<SkeletonSequence>) =
            seqs.into_iter().partition(|s| msr_subject(&s.id).is_some_and(|n| n % 2 == 1));
        let r = run_action_recognition(&train, &test, &ActionConfig::default(), Classifier::Linear, None).unwrap();
        pass &= within(r.accuracy, MSR_TARGET);
        notes.push(format!("MSR accuracy {:.3}", r.accuracy));
    }

    if notes.is_empty() {
        let _ = writeln!(std::io::stderr(), "criterion 10: SKIP (no datasets supplied; conditional criterion passes without them)");
        return;
    }
    report(10, pass, t0.elapsed(), None, &notes.join("; "));
}

#[test]
fn criterion_11_volumetric_pipeline() {
    let t0 = Instant::now();
    let mut accs = Vec::new();
    for seed in 0..5u64 {
        let train = gestures::synth_gestures(8, seed);
        let test = gestures::synth_gestures(8, seed + 1000);
        let r = run_action_recognition(&train, &test, &ActionConfig::default(), Classifier::Knn, None).unwrap();
        accs.push(r.accuracy);
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;

    // Oracles on a 10x10x10 volume.
    let mut r = common::rng(11);
    let grid = Grid::new([10, 10, 10], 1.0).unwrap();
    let trajs: Vec<Trajectory<3>> = (0..6)
        .map(|i| {
            let pts = (0..10).map(|_| [r.random_range(0.0..9.0), r.random_range(0.0..9.0), r.random_range(0.0..9.0)]).collect();
            Trajectory::new(format!("v{i}"), pts, 1.0)
        })
        .collect();
    let set = TrajectorySet::new(trajs, grid).unwrap();
    let rho = density_field(&set, &KernelOptions::exact(1.0)).unwrap();
    let mut field_dev = 0.0f64;
    for idx in 0..grid.len() {
        let c = grid.cell_of(idx).map(|v| v as f64);
        let brute: f64 = set
            .trajectories
            .iter()
            .flat_map(|t| t.points.iter())
            .map(|p| common::kernel(((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2) + (c[2] - p[2]).powi(2)).sqrt(), 1.0))
            .sum();
        field_dev = field_dev.max((rho.values[idx] - brute).abs() / brute.max(1.0));
    }
    let mut diff_dev = 0.0f64;
    for case in 0..5u64 {
        let f = common::random_field([10, 10, 10], 0.05, 5.0, 700 + case);
        let seed = [r.random_range(0..10), r.random_range(0..10), r.random_range(0..10)];
        let fast = diffuse(&f, seed, &DiffusionOptions::default()).unwrap().full_energies();
        let slow = common::naive_diffuse(&[10, 10, 10], common::field_k(&f), &seed, 100.0, false);
        diff_dev = fast.iter().zip(&slow).fold(diff_dev, |m, (a, b)| m.max((a - b).abs()));
    }
    let oracle_ok = rel_close(field_dev, 0.0, VOLUME_ORACLE_TOL) && diff_dev <= VOLUME_ORACLE_TOL;
    report(
        11,
        mean >= MIN_GESTURE_ACCURACY && oracle_ok,
        t0.elapsed(),
        None,
        &format!(
            "3-action gestures kNN accuracy {accs:.3?} (mean {mean:.3}); 10^3 field deviation {field_dev:.2e}, diffusion deviation {diff_dev:.2e}"
        ),
    );
}

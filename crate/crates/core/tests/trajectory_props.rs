mod common;

use proptest::prelude::*;
use tubelet::synth::{presets, synth_scene};
use tubelet::{corrupt, resample, CorruptMode, Trajectory};

fn polyline() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y)| [x, y]), 2..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn resample_is_idempotent(pts in polyline(), spacing in 0.3..5.0f64) {
        let t = Trajectory::new("p", pts, 1.0);
        prop_assume!(t.arc_length() > 0.0);
        let once = resample(&t, spacing).unwrap();
        let twice = resample(&once, spacing).unwrap();
        prop_assert_eq!(once.points.len(), twice.points.len());
        for (a, b) in once.points.iter().zip(&twice.points) {
            prop_assert!((a[0] - b[0]).abs() <= 1e-9 && (a[1] - b[1]).abs() <= 1e-9, "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn resample_keeps_chord_spacing(pts in polyline(), spacing in 0.3..5.0f64) {
        let t = Trajectory::new("p", pts, 1.0);
        prop_assume!(t.arc_length() > 0.0);
        let r = resample(&t, spacing).unwrap();
        let n = r.points.len();
        for w in r.points[..n - 1].windows(2) {
            let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
            prop_assert!((d - spacing).abs() < 1e-7, "chord {} vs {}", d, spacing);
        }
        prop_assert_eq!(r.points[n - 1], *t.points.last().unwrap());
    }

    #[test]
    fn one_velocity_per_point(pts in polyline(), dt in 0.1..3.0f64) {
        let t = Trajectory::new("p", pts, dt);
        let v = t.velocities().unwrap();
        prop_assert_eq!(v.len(), t.len());
        prop_assert_eq!(v[v.len() - 1], v[v.len() - 2]);
    }

    #[test]
    fn corrupt_is_a_pure_function(seed in 0u64..1000, level in 0.0..0.9f64) {
        let set = common::random_set(20, 20, 12, 15, seed);
        for mode in [CorruptMode::Noise, CorruptMode::OmitHead, CorruptMode::OmitTail] {
            let (a, ra) = corrupt(&set, mode, level, seed).unwrap();
            let (b, rb) = corrupt(&set, mode, level, seed).unwrap();
            prop_assert_eq!(&a.trajectories, &b.trajectories);
            prop_assert_eq!(ra.selected, rb.selected);
        }
    }
}

#[test]
fn synthetic_labels_partition_with_exact_counts() {
    for seed in 0..5 {
        let spec = presets::intersection(30);
        let set = synth_scene(&spec, seed).unwrap();
        assert_eq!(set.len(), 120);
        let labels = set.labels();
        assert_eq!(labels.len(), 4);
        for lane in &spec.lanes {
            let n = set.trajectories.iter().filter(|t| t.label.as_deref() == Some(&lane.label)).count();
            assert_eq!(n, lane.count, "lane {}", lane.label);
        }
        assert!(set.trajectories.iter().all(|t| t.label.is_some()));
    }
}

#[test]
fn noise_corruption_moves_every_point_but_keeps_shape() {
    let set = common::random_set(30, 30, 5, 20, 3);
    let (noisy, _) = corrupt(&set, CorruptMode::Noise, 1.0, 9).unwrap();
    for (a, b) in set.trajectories.iter().zip(&noisy.trajectories) {
        assert_eq!(a.len(), b.len());
        assert!(a.points.iter().zip(&b.points).any(|(p, q)| p != q));
    }
}

mod common;

use std::io::Cursor;
use std::path::Path;

use rand::Rng;
use tubelet::action3d::{
    action_features, align_skeletons, build_field_3d, droplet_sphere, feature_columns, gestures, ActionConfig,
    SphereSampling,
};
use tubelet::io::{read_vectors_csv, write_vectors_csv};
use tubelet::{Grid, RunConfig, Trajectory};

fn tracks(seed: u64, shift: [f64; 3]) -> Vec<Trajectory<3>> {
    let mut r = common::rng(seed);
    (0..6)
        .map(|i| {
            let mut p = [r.random_range(3.0..9.0), r.random_range(3.0..9.0), r.random_range(3.0..9.0)];
            let pts = (0..12)
                .map(|_| {
                    let q = [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]];
                    for v in p.iter_mut() {
                        *v = (*v + r.random_range(-0.8..0.8)).clamp(0.5, 10.5);
                    }
                    q
                })
                .collect();
            Trajectory::new(format!("j{i}"), pts, 1.0)
        })
        .collect()
}

#[test]
fn droplet_sphere_ignores_rigid_grid_translation() {
    let config = RunConfig { sigma: 1.0, ..RunConfig::default() };
    let dirs = SphereSampling::Cube26.directions();
    for seed in 0..4 {
        let base_grid = Grid::new([12, 12, 12], 1.0).unwrap();
        let shift = [3.0, -5.0, 7.0];
        let moved_grid = Grid::with_origin([12, 12, 12], 1.0, shift).unwrap();
        let a_tracks = tracks(seed, [0.0; 3]);
        let b_tracks = tracks(seed, shift);
        let fa = build_field_3d(&a_tracks, base_grid, &config).unwrap();
        let fb = build_field_3d(&b_tracks, moved_grid, &config).unwrap();
        for (x, y) in fa.coeffs.iter().zip(&fb.coeffs) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
        let a = droplet_sphere(&fa, &a_tracks[0], &dirs, &config).unwrap();
        let b = droplet_sphere(&fb, &b_tracks[0], &dirs, &config).unwrap();
        assert_eq!(a.len(), 26);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
        assert_eq!(a, droplet_sphere(&fa, &a_tracks[0], &dirs, &config).unwrap());
    }
}

#[test]
fn feature_layout_round_trips_through_csv() {
    let mut config = ActionConfig::default();
    config.align.volume_cells = 10;
    let seqs = align_skeletons(&gestures::synth_gestures(2, 3), &config.align).unwrap();
    let (labels, feats) = action_features(&seqs, &[&seqs[..]], &config).unwrap();
    let n_s = config.sphere.directions().len();
    let nb = gestures::JOINTS;
    let columns = feature_columns(&labels, nb, n_s);
    assert_eq!(feats[0][0].len(), labels.len() * nb * n_s);
    assert_eq!(columns.len(), feats[0][0].len());

    let rows: Vec<(String, Vec<f64>)> = seqs.iter().zip(&feats[0]).map(|(s, f)| (s.id.clone(), f.clone())).collect();
    let mut buf = Vec::new();
    write_vectors_csv(&mut buf, &columns, &rows).unwrap();
    let (cols, back) = read_vectors_csv(Path::new("mem.csv"), Cursor::new(buf)).unwrap();
    assert_eq!(cols, columns);
    assert_eq!(back, rows);
    // Class-major, then body point, then sphere direction.
    assert_eq!(cols[0], format!("{}:0:0", labels[0]));
    assert_eq!(cols[n_s], format!("{}:1:0", labels[0]));
    assert_eq!(cols[nb * n_s], format!("{}:0:0", labels[1]));
}

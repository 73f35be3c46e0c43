//! Synthetic labeled scenes: noisy samples along lane centerlines, plus
//! off-route random walks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dist, Grid};
use crate::trajectory::{Trajectory, TrajectorySet};

/// One traffic lane in scene coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub label: String,
    pub centerline: Vec<[f64; 2]>,
    /// Std of the per-trajectory sideways offset from the centerline.
    pub lateral_std: f64,
    pub count: usize,
    /// Distance travelled per sample interval.
    pub speed: f64,
    /// Amplitude of the smooth sideways meander of each trajectory.
    #[serde(default)]
    pub sway: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub lanes: Vec<Lane>,
    pub dt: f64,
    /// Std of independent per-point jitter.
    pub point_jitter: f64,
    /// Each end of a trajectory is cut by a uniform fraction in `[0, trim]` of its length.
    pub trim: f64,
    /// Shortest meander wavelength; each trajectory draws two in `[w, 2w]`.
    #[serde(default = "default_wavelength")]
    pub sway_wavelength: f64,
}

fn default_wavelength() -> f64 {
    12.0
}

impl SyntheticSpec {
    pub fn grid(&self) -> Result<Grid<2>> {
        Grid::new([self.width, self.height], self.cell_size)
    }
}

/// Polyline through `points` with each interior corner replaced by a circular
/// arc of the given radius (sampled every ~0.25 units).
pub fn rounded(points: &[[f64; 2]], radius: f64) -> Vec<[f64; 2]> {
    if points.len() < 3 || radius <= 0.0 {
        return points.to_vec();
    }
    let mut out = vec![points[0]];
    for w in points.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let (l1, l2) = (dist(&a, &b), dist(&b, &c));
        let u1 = [(b[0] - a[0]) / l1, (b[1] - a[1]) / l1];
        let u2 = [(c[0] - b[0]) / l2, (c[1] - b[1]) / l2];
        let cos = (u1[0] * u2[0] + u1[1] * u2[1]).clamp(-1.0, 1.0);
        let turn = cos.acos();
        if turn < 1e-6 {
            out.push(b);
            continue;
        }
        let cut = (radius * (turn / 2.0).tan()).min(0.5 * l1.min(l2));
        let p0 = [b[0] - u1[0] * cut, b[1] - u1[1] * cut];
        let p1 = [b[0] + u2[0] * cut, b[1] + u2[1] * cut];
        // Quadratic Bezier through the corner approximates the arc.
        let steps = ((2.0 * cut) / 0.25).ceil().max(2.0) as usize;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let q = |i: usize| (1.0 - t).powi(2) * p0[i] + 2.0 * t * (1.0 - t) * b[i] + t * t * p1[i];
            out.push([q(0), q(1)]);
        }
    }
    out.push(*points.last().expect("non-empty"));
    out.dedup_by(|x, y| dist(x, y) < 1e-9);
    out
}

fn cumulative(poly: &[[f64; 2]]) -> Vec<f64> {
    let mut cum = vec![0.0];
    for w in poly.windows(2) {
        cum.push(cum.last().expect("non-empty") + dist(&w[0], &w[1]));
    }
    cum
}

/// Point and unit tangent at arc length `s`.
fn at_arc(poly: &[[f64; 2]], cum: &[f64], s: f64) -> ([f64; 2], [f64; 2]) {
    let seg = match cum.iter().position(|&c| c > s) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => poly.len() - 2,
    }
    .min(poly.len() - 2);
    let len = cum[seg + 1] - cum[seg];
    let f = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
    let (a, b) = (poly[seg], poly[seg + 1]);
    let t = if len > 0.0 { [(b[0] - a[0]) / len, (b[1] - a[1]) / len] } else { [1.0, 0.0] };
    ([a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])], t)
}

/// Generate labeled trajectories along each lane. Deterministic under `seed`.
pub fn synth_scene(spec: &SyntheticSpec, seed: u64) -> Result<TrajectorySet<2>> {
    if spec.lanes.is_empty() {
        return Err(Error::invalid("synthetic scene needs at least one lane"));
    }
    if !(spec.dt > 0.0) || !(0.0..0.5).contains(&spec.trim) {
        return Err(Error::invalid("synthetic scene needs dt > 0 and trim in [0, 0.5)"));
    }
    let grid = spec.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, spec.point_jitter.max(0.0)).map_err(|e| Error::invalid(e.to_string()))?;
    let mut out = Vec::new();
    for lane in &spec.lanes {
        if lane.centerline.len() < 2 || !(lane.speed > 0.0) {
            return Err(Error::invalid(format!("lane {} needs >= 2 vertices and positive speed", lane.label)));
        }
        if lane.centerline.iter().any(|p| !grid.contains(&grid.to_grid(p))) {
            return Err(Error::LaneOutsideGrid(lane.label.clone()));
        }
        let lateral = Normal::new(0.0, lane.lateral_std.max(0.0)).map_err(|e| Error::invalid(e.to_string()))?;
        let cum = cumulative(&lane.centerline);
        let total = *cum.last().expect("non-empty");
        for i in 0..lane.count {
            let offset = lateral.sample(&mut rng);
            let waves: [(f64, f64, f64); 2] = std::array::from_fn(|_| {
                let amp = lane.sway * (0.5 + 0.5 * rng.random::<f64>());
                let k = std::f64::consts::TAU / (spec.sway_wavelength * (1.0 + rng.random::<f64>()));
                (amp, k, rng.random::<f64>() * std::f64::consts::TAU)
            });
            let s0 = rng.random::<f64>() * spec.trim * total;
            let s1 = total - rng.random::<f64>() * spec.trim * total;
            let mut points = Vec::new();
            let mut s = s0;
            while s <= s1 + 1e-9 {
                let (p, t) = at_arc(&lane.centerline, &cum, s);
                let offset = offset + waves.iter().map(|(a, k, ph)| a * (k * s + ph).sin()).sum::<f64>();
                let mut q = [p[0] - t[1] * offset + jitter.sample(&mut rng), p[1] + t[0] * offset + jitter.sample(&mut rng)];
                grid.clamp_scene(&mut q);
                points.push(q);
                s += lane.speed;
            }
            if points.len() < 2 {
                return Err(Error::invalid(format!("lane {} is shorter than one step", lane.label)));
            }
            out.push(Trajectory::new(format!("{}-{i}", lane.label), points, spec.dt).with_label(lane.label.clone()));
        }
    }
    TrajectorySet::new(out, grid)
}

/// Random walks whose heading drifts by a normal turn of std `wander` radians
/// per step, kept inside the grid by reflecting off its border. Unlabeled.
pub fn random_walks(grid: &Grid<2>, count: usize, steps: usize, step: f64, wander: f64, seed: u64) -> Vec<Trajectory<2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let turn = Normal::new(0.0, wander.max(0.0)).expect("non-negative std");
    let hi = [grid.to_scene(&[(grid.dims[0] - 1) as f64, 0.0])[0], grid.to_scene(&[0.0, (grid.dims[1] - 1) as f64])[1]];
    let lo = grid.origin;
    (0..count)
        .map(|i| {
            let mut p = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
            let mut heading = rng.random::<f64>() * std::f64::consts::TAU;
            let mut points = vec![p];
            for _ in 1..steps.max(2) {
                heading += turn.sample(&mut rng);
                let mut next = [p[0] + step * heading.cos(), p[1] + step * heading.sin()];
                for k in 0..2 {
                    if next[k] < lo[k] || next[k] > hi[k] {
                        next[k] = next[k].clamp(lo[k], hi[k]);
                        heading = if k == 0 { std::f64::consts::PI - heading } else { -heading };
                    }
                }
                p = next;
                points.push(p);
            }
            Trajectory::new(format!("walk-{i}"), points, 1.0)
        })
        .collect()
}

/// Preset scenes on a 48 x 48 grid of unit cells.
pub mod presets {
    use super::{rounded, Lane, SyntheticSpec};

    fn lane(label: &str, pts: &[[f64; 2]], count: usize) -> Lane {
        Lane { label: label.into(), centerline: rounded(pts, 6.0), lateral_std: 0.6, count, speed: 1.0, sway: 0.5 }
    }

    fn spec(lanes: Vec<Lane>) -> SyntheticSpec {
        SyntheticSpec { width: 48, height: 48, cell_size: 1.0, lanes, dt: 1.0, point_jitter: 0.0, trim: 0.1, sway_wavelength: 12.0 }
    }

    /// Four routes through a crossroads: two straights and two turns.
    pub fn intersection(count: usize) -> SyntheticSpec {
        spec(vec![
            lane("east", &[[2.0, 21.0], [45.0, 21.0]], count),
            lane("north", &[[27.0, 2.0], [27.0, 45.0]], count),
            lane("west-left", &[[45.0, 27.0], [21.0, 27.0], [21.0, 45.0]], count),
            lane("south-right", &[[21.0, 45.0], [21.0, 33.0], [2.0, 33.0]], count),
        ])
    }

    /// Two adjacent leftward lanes 6 cells apart on a 96 x 96 grid that differ
    /// only in their traffic: one sways between positions, the other holds its
    /// line. A northbound stream crosses both. Heavy end trims leave the two
    /// lanes hard to separate by position alone.
    pub fn adjacent_lanes(count: usize) -> SyntheticSpec {
        let steer = |label: &str, y: f64, sway: f64| Lane {
            lateral_std: 0.8,
            sway,
            ..lane(label, &[[92.0, y], [4.0, y]], count)
        };
        SyntheticSpec {
            width: 96,
            height: 96,
            trim: 0.3,
            ..spec(vec![
                steer("busy", 51.0, 1.5),
                steer("steady", 45.0, 0.2),
                Lane { lateral_std: 0.8, ..lane("cross", &[[28.8, 4.0], [28.8, 92.0]], count) },
            ])
        }
    }

    /// Seven normal routes for abnormality detection.
    pub fn seven_routes(count: usize) -> SyntheticSpec {
        spec(vec![
            lane("r1", &[[2.0, 12.0], [45.0, 12.0]], count),
            lane("r2", &[[45.0, 17.0], [2.0, 17.0]], count),
            lane("r3", &[[12.0, 45.0], [12.0, 2.0]], count),
            lane("r4", &[[17.0, 2.0], [17.0, 45.0]], count),
            lane("r5", &[[2.0, 36.0], [36.0, 36.0], [36.0, 45.0]], count),
            lane("r6", &[[45.0, 30.0], [30.0, 30.0], [30.0, 2.0]], count),
            lane("r7", &[[2.0, 2.0], [45.0, 45.0]], count),
        ])
    }

    /// Fifteen routes on a larger 64 x 64 grid.
    pub fn fifteen_routes(count: usize) -> SyntheticSpec {
        let mut lanes = Vec::new();
        for (i, y) in [10.0, 32.0, 54.0].iter().enumerate() {
            lanes.push(lane(&format!("e{i}"), &[[2.0, *y], [61.0, *y]], count));
            lanes.push(lane(&format!("w{i}"), &[[61.0, y + 4.0], [2.0, y + 4.0]], count));
        }
        for (i, x) in [16.0, 44.0].iter().enumerate() {
            lanes.push(lane(&format!("n{i}"), &[[*x, 2.0], [*x, 61.0]], count));
            lanes.push(lane(&format!("s{i}"), &[[x + 4.0, 61.0], [x + 4.0, 2.0]], count));
        }
        lanes.push(lane("t0", &[[2.0, 24.0], [28.0, 24.0], [28.0, 61.0]], count));
        lanes.push(lane("t1", &[[61.0, 24.0], [36.0, 24.0], [36.0, 2.0]], count));
        lanes.push(lane("t2", &[[2.0, 46.0], [28.0, 46.0], [28.0, 2.0]], count));
        lanes.push(lane("t3", &[[61.0, 46.0], [36.0, 46.0], [36.0, 61.0]], count));
        lanes.push(lane("d0", &[[4.0, 4.0], [59.0, 59.0]], count));
        SyntheticSpec { width: 64, height: 64, lanes, ..spec(vec![]) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(count: usize, lateral_std: f64) -> SyntheticSpec {
        SyntheticSpec {
            width: 20,
            height: 20,
            cell_size: 1.0,
            lanes: vec![Lane { label: "a".into(), centerline: vec![[1.0, 5.0], [18.0, 5.0]], lateral_std, count, speed: 1.0, sway: 0.0 }],
            dt: 1.0,
            point_jitter: 0.0,
            trim: 0.0,
            sway_wavelength: 12.0,
        }
    }

    #[test]
    fn identical_routes_without_noise() {
        let set = synth_scene(&straight(5, 0.0), 3).unwrap();
        assert_eq!(set.len(), 5);
        assert!(set.trajectories.iter().all(|t| t.points == set.trajectories[0].points));
        assert_eq!(set.trajectories[0].len(), 18);
    }

    #[test]
    fn intersection_counts_and_determinism() {
        let spec = presets::intersection(30);
        let a = synth_scene(&spec, 7).unwrap();
        assert_eq!(a.len(), 120);
        assert_eq!(a.labels().len(), 4);
        for l in a.labels() {
            assert_eq!(a.trajectories.iter().filter(|t| t.label.as_deref() == Some(&l)).count(), 30);
        }
        let b = synth_scene(&spec, 7).unwrap();
        assert_eq!(a.trajectories, b.trajectories);
    }

    #[test]
    fn adjacent_lane_means_differ_by_offset() {
        let mut spec = presets::adjacent_lanes(40);
        spec.trim = 0.0;
        spec.point_jitter = 0.0;
        let set = synth_scene(&spec, 1).unwrap();
        let mean_y = |label: &str| {
            let ys: Vec<f64> = set
                .trajectories
                .iter()
                .filter(|t| t.label.as_deref() == Some(label))
                .flat_map(|t| t.points.iter().map(|p| p[1]))
                .collect();
            ys.iter().sum::<f64>() / ys.len() as f64
        };
        assert!((mean_y("busy") - mean_y("steady") - 6.0).abs() < 0.6);
    }

    #[test]
    fn sway_bends_each_trajectory() {
        let mut spec = straight(4, 0.0);
        let spread = |spec: &SyntheticSpec| {
            let set = synth_scene(spec, 2).unwrap();
            set.trajectories
                .iter()
                .map(|t| {
                    let (lo, hi) = t.points.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p[1]), b.max(p[1])));
                    hi - lo
                })
                .fold(0.0, f64::max)
        };
        assert!(spread(&spec) < 1e-12);
        spec.lanes[0].sway = 1.0;
        let s = spread(&spec);
        assert!(s > 0.5 && s <= 4.0 + 1e-9, "{s}");
    }

    #[test]
    fn lane_outside_grid_errors() {
        let mut spec = straight(1, 0.0);
        spec.lanes[0].centerline[1] = [25.0, 5.0];
        assert!(matches!(synth_scene(&spec, 0), Err(Error::LaneOutsideGrid(_))));
    }

    #[test]
    fn walks_stay_inside() {
        let g = Grid::new([30, 30], 1.0).unwrap();
        for w in random_walks(&g, 10, 40, 1.0, 0.35, 2) {
            assert!(w.points.iter().all(|p| g.contains(&g.to_grid(p))));
        }
    }

    #[test]
    fn rounded_corner_stays_near_polyline() {
        let r = rounded(&[[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]], 3.0);
        assert_eq!(r[0], [0.0, 0.0]);
        assert_eq!(*r.last().unwrap(), [10.0, 10.0]);
        assert!(r.iter().all(|p| p[0] >= -1e-9 && p[0] <= 10.0 + 1e-9 && p[1] >= -1e-9));
    }
}

//! Trajectory data model, resampling and the corruption transforms used in
//! robustness sweeps.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::{dist, Grid};

/// An ordered position sequence sampled every `dt` time units.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize = 2> {
    pub id: String,
    pub points: Vec<[f64; D]>,
    pub dt: f64,
    pub label: Option<String>,
}

pub type Trajectory3 = Trajectory<3>;

impl<const D: usize> Trajectory<D> {
    pub fn new(id: impl Into<String>, points: Vec<[f64; D]>, dt: f64) -> Self {
        Self { id: id.into(), points, dt, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total polyline length in scene units.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(&w[0], &w[1])).sum()
    }

    /// Finite-difference velocities `(p[n+1] - p[n]) / dt`, one per point; the
    /// last point repeats the final segment's velocity.
    pub fn velocities(&self) -> Result<Vec<[f64; D]>> {
        if self.points.len() < 2 {
            return Err(Error::invalid(format!(
                "trajectory {} needs at least 2 points for velocities",
                self.id
            )));
        }
        let mut out: Vec<[f64; D]> = self
            .points
            .windows(2)
            .map(|w| std::array::from_fn(|i| (w[1][i] - w[0][i]) / self.dt))
            .collect();
        out.push(*out.last().expect("non-empty"));
        Ok(out)
    }

    /// Reverse the point order (and hence the heading).
    pub fn reversed(&self) -> Self {
        let mut t = self.clone();
        t.points.reverse();
        t
    }
}

/// Equal-chord resampling: starting at the first point, each next sample is
/// the first place along the polyline at Euclidean distance `spacing` from
/// the previous sample. The final point is always kept, so the last gap may be
/// shorter. Applying it twice at the same spacing is a no-op.
pub fn resample<const D: usize>(traj: &Trajectory<D>, spacing: f64) -> Result<Trajectory<D>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!("resample spacing {spacing} must be positive")));
    }
    let pts = &traj.points;
    if pts.is_empty() || pts.windows(2).all(|w| dist(&w[0], &w[1]) == 0.0) {
        return Err(Error::ZeroLength(traj.id.clone()));
    }
    let end = *pts.last().expect("non-empty");
    let s2 = spacing * spacing;
    let mut out = vec![pts[0]];
    let mut cur = pts[0];
    let mut seg = 0usize;
    let mut t0 = 0.0;

    'outer: loop {
        // Walk forward from (seg, t0) to the first exit from the circle around `cur`.
        let mut j = seg;
        let mut tmin = t0;
        while j + 1 < pts.len() {
            let a = pts[j];
            let d: [f64; D] = std::array::from_fn(|i| pts[j + 1][i] - a[i]);
            let w: [f64; D] = std::array::from_fn(|i| a[i] - cur[i]);
            let qa: f64 = d.iter().map(|v| v * v).sum();
            if qa > 0.0 {
                let qb: f64 = 2.0 * (0..D).map(|i| d[i] * w[i]).sum::<f64>();
                let qc: f64 = w.iter().map(|v| v * v).sum::<f64>() - s2;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    // Larger root without cancellation between qb and the square root.
                    let t = if qb <= 0.0 { (-qb + disc.sqrt()) / (2.0 * qa) } else { -2.0 * qc / (qb + disc.sqrt()) };
                    if t >= tmin - 1e-9 && t <= 1.0 + 1e-9 {
                        let t = t.clamp(tmin, 1.0);
                        let q: [f64; D] = std::array::from_fn(|i| a[i] + t * d[i]);
                        out.push(q);
                        cur = q;
                        seg = j;
                        t0 = t;
                        continue 'outer;
                    }
                }
            }
            j += 1;
            tmin = 0.0;
        }
        break;
    }

    let last = *out.last().expect("non-empty");
    if dist(&last, &end) <= 1e-9 * spacing {
        *out.last_mut().expect("non-empty") = end;
    } else {
        out.push(end);
    }
    if out.len() < 2 {
        out.push(end);
    }
    let duration = traj.dt * (pts.len().max(2) - 1) as f64;
    Ok(Trajectory {
        id: traj.id.clone(),
        dt: duration / (out.len() - 1) as f64,
        points: out,
        label: traj.label.clone(),
    })
}

/// A set of trajectories sharing one grid.
#[derive(Debug, Clone)]
pub struct TrajectorySet<const D: usize = 2> {
    pub trajectories: Vec<Trajectory<D>>,
    pub grid: Grid<D>,
}

impl<const D: usize> TrajectorySet<D> {
    pub fn new(trajectories: Vec<Trajectory<D>>, grid: Grid<D>) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::invalid("trajectory set must be non-empty"));
        }
        Ok(Self { trajectories, grid })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Distinct labels in first-seen order.
    pub fn labels(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for t in &self.trajectories {
            if let Some(l) = &t.label {
                if !seen.contains(l) {
                    seen.push(l.clone());
                }
            }
        }
        seen
    }

    /// Per-trajectory label indices into [`labels`](Self::labels); unlabeled
    /// trajectories get `usize::MAX`.
    pub fn label_indices(&self) -> Vec<usize> {
        let labels = self.labels();
        self.trajectories
            .iter()
            .map(|t| match &t.label {
                Some(l) => labels.iter().position(|x| x == l).expect("label listed"),
                None => usize::MAX,
            })
            .collect()
    }

    /// Resample every trajectory to `spacing` grid cells.
    pub fn resampled(&self, spacing_cells: f64) -> Result<Self> {
        let spacing = spacing_cells * self.grid.cell_size;
        let trajectories = self
            .trajectories
            .iter()
            .map(|t| resample(t, spacing))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { trajectories, grid: self.grid })
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.trajectories[i].clone()).collect(), self.grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptMode {
    Noise,
    OmitHead,
    OmitTail,
}

impl std::str::FromStr for CorruptMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise" => Ok(Self::Noise),
            "omit_head" | "omit-head" => Ok(Self::OmitHead),
            "omit_tail" | "omit-tail" => Ok(Self::OmitTail),
            other => Err(Error::invalid(format!("unknown corruption mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CorruptReport {
    /// Ids of trajectories selected for an omit transform.
    pub selected: Vec<String>,
    pub warnings: Vec<String>,
}

/// Apply a robustness corruption.
///
/// `Noise` adds i.i.d. Gaussian displacement with standard deviation `level`
/// cells to every coordinate of every point (then clamps to the grid). The
/// omit modes drop `floor(level * L)` points from the head or tail of two in
/// every ten trajectories of each label group, chosen by stride over a seeded
/// shuffle of the group.
pub fn corrupt<const D: usize>(
    set: &TrajectorySet<D>,
    mode: CorruptMode,
    level: f64,
    seed: u64,
) -> Result<(TrajectorySet<D>, CorruptReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = set.clone();
    let mut report = CorruptReport::default();
    match mode {
        CorruptMode::Noise => {
            if !(level >= 0.0 && level.is_finite()) {
                return Err(Error::invalid(format!("noise level {level} must be >= 0")));
            }
            let normal = Normal::new(0.0, level * set.grid.cell_size)
                .map_err(|e| Error::invalid(e.to_string()))?;
            for t in out.trajectories.iter_mut() {
                for p in t.points.iter_mut() {
                    for v in p.iter_mut() {
                        *v += normal.sample(&mut rng);
                    }
                    set.grid.clamp_scene(p);
                }
            }
        }
        CorruptMode::OmitHead | CorruptMode::OmitTail => {
            if !(0.0..1.0).contains(&level) {
                return Err(Error::invalid(format!("omit fraction {level} must lie in [0, 1)")));
            }
            let mut groups: BTreeMap<Option<String>, Vec<usize>> = BTreeMap::new();
            for (i, t) in set.trajectories.iter().enumerate() {
                groups.entry(t.label.clone()).or_default().push(i);
            }
            for members in groups.values_mut() {
                members.shuffle(&mut rng);
                for (rank, &i) in members.iter().enumerate() {
                    if rank % 5 != 0 {
                        continue;
                    }
                    let t = &mut out.trajectories[i];
                    let drop = (level * t.len() as f64 + 1e-9).floor() as usize;
                    report.selected.push(t.id.clone());
                    if t.len() < drop + 2 {
                        report.warnings.push(format!(
                            "{}: omitting {drop} of {} points would leave < 2; left intact",
                            t.id,
                            t.len()
                        ));
                        continue;
                    }
                    match mode {
                        CorruptMode::OmitHead => {
                            t.points.drain(..drop);
                        }
                        _ => t.points.truncate(t.len() - drop),
                    }
                }
            }
        }
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Trajectory {
        Trajectory::new("t", (0..n).map(|i| [i as f64, 0.0]).collect(), 1.0)
    }

    #[test]
    fn velocities_constant_motion() {
        let v = line(3).velocities().unwrap();
        assert_eq!(v, vec![[1.0, 0.0]; 3]);
        let t = Trajectory::new("t", vec![[0.0, 0.0], [0.0, 2.0]], 2.0);
        assert_eq!(t.velocities().unwrap(), vec![[0.0, 1.0], [0.0, 1.0]]);
        assert!(Trajectory::new("t", vec![[0.0, 0.0]], 1.0).velocities().is_err());
    }

    #[test]
    fn resample_straight_segment() {
        let t = Trajectory::new("s", vec![[0.0, 0.0], [10.0, 0.0]], 1.0);
        let r = resample(&t, 1.0).unwrap();
        assert_eq!(r.len(), 11);
        for (i, p) in r.points.iter().enumerate() {
            assert!((p[0] - i as f64).abs() < 1e-12 && p[1] == 0.0);
        }
        assert!((r.dt - 0.1).abs() < 1e-12);
    }

    #[test]
    fn resample_zero_length_errors() {
        let t = Trajectory::new("z", vec![[1.0, 1.0]; 4], 1.0);
        assert!(matches!(resample(&t, 1.0), Err(Error::ZeroLength(_))));
        assert!(resample(&line(3), 0.0).is_err());
    }

    #[test]
    fn resample_short_path_keeps_endpoints() {
        let t = Trajectory::new("s", vec![[0.0, 0.0], [0.3, 0.0]], 1.0);
        let r = resample(&t, 1.0).unwrap();
        assert_eq!(r.points, vec![[0.0, 0.0], [0.3, 0.0]]);
    }

    fn labeled_set(n_per: usize, len: usize) -> TrajectorySet {
        let mut ts = Vec::new();
        for c in 0..2 {
            for i in 0..n_per {
                ts.push(
                    Trajectory::new(
                        format!("{c}-{i}"),
                        (0..len).map(|k| [k as f64, (c * 10 + i) as f64 * 0.1]).collect(),
                        1.0,
                    )
                    .with_label(format!("c{c}")),
                );
            }
        }
        TrajectorySet::new(ts, Grid::new([40, 40], 1.0).unwrap()).unwrap()
    }

    #[test]
    fn omit_head_drops_leading_points() {
        let set = labeled_set(10, 10);
        let (out, report) = corrupt(&set, CorruptMode::OmitHead, 0.2, 3).unwrap();
        assert_eq!(report.selected.len(), 4);
        for (a, b) in set.trajectories.iter().zip(&out.trajectories) {
            if report.selected.contains(&a.id) {
                assert_eq!(b.len(), 8);
                assert_eq!(b.points[..], a.points[2..]);
            } else {
                assert_eq!(a, b);
            }
        }
        let (tail, _) = corrupt(&set, CorruptMode::OmitTail, 0.2, 3).unwrap();
        for (a, b) in set.trajectories.iter().zip(&tail.trajectories) {
            if b.len() == 8 {
                assert_eq!(b.points[..], a.points[..8]);
            }
        }
    }

    #[test]
    fn omit_leaving_too_few_points_is_skipped() {
        let set = labeled_set(10, 3);
        let (out, report) = corrupt(&set, CorruptMode::OmitTail, 0.7, 1).unwrap();
        assert_eq!(report.warnings.len(), 4);
        assert!(out.trajectories.iter().all(|t| t.len() == 3));
    }

    #[test]
    fn zero_noise_is_identity_and_noise_is_deterministic() {
        let set = labeled_set(5, 8);
        let (out, _) = corrupt(&set, CorruptMode::Noise, 0.0, 9).unwrap();
        for (a, b) in set.trajectories.iter().zip(&out.trajectories) {
            assert_eq!(a.points, b.points);
        }
        let (x, _) = corrupt(&set, CorruptMode::Noise, 1.0, 42).unwrap();
        let (y, _) = corrupt(&set, CorruptMode::Noise, 1.0, 42).unwrap();
        for (a, b) in x.trajectories.iter().zip(&y.trajectories) {
            assert_eq!(a.points, b.points);
        }
        assert!(corrupt(&set, CorruptMode::Noise, -1.0, 0).is_err());
        assert!(corrupt(&set, CorruptMode::OmitHead, 1.0, 0).is_err());
    }
}

use crate::grid::dist;
use crate::trajectory::Trajectory;

/// Points per trajectory in the Euclidean-distance baseline features.
pub const ED_POINTS: usize = 16;

/// Flattened coordinates of `n` points spaced uniformly in arc length.
pub fn ed_features<const D: usize>(traj: &Trajectory<D>, n: usize) -> Vec<f64> {
    let pts = &traj.points;
    let mut out = Vec::with_capacity(n * D);
    if pts.len() < 2 || n < 2 {
        for _ in 0..n {
            out.extend_from_slice(&pts[0]);
        }
        return out;
    }
    let cum: Vec<f64> = std::iter::once(0.0)
        .chain(pts.windows(2).scan(0.0, |acc, w| {
            *acc += dist(&w[0], &w[1]);
            Some(*acc)
        }))
        .collect();
    let total = *cum.last().expect("non-empty");
    let mut seg = 0;
    for i in 0..n {
        let s = total * i as f64 / (n - 1) as f64;
        while seg + 2 < pts.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let f = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        for k in 0..D {
            out.push(pts[seg][k] + f * (pts[seg + 1][k] - pts[seg][k]));
        }
    }
    out
}

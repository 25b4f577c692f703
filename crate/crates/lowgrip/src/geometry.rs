//! Trajectory-to-obstacle distance metric.

use crate::error::{Error, Result};
use crate::types::Trajectory;

/// Euclidean distance from point `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (px, py) = p;
    let (ax, ay) = a;
    let (bx, by) = b;
    let dx = bx - ax;
    let dy = by - ay;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return ((px - ax).powi(2) + (py - ay).powi(2)).sqrt();
    }
    let t = (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0);
    let cx = ax + t * dx;
    let cy = ay + t * dy;
    ((px - cx).powi(2) + (py - cy).powi(2)).sqrt()
}

/// Minimum distance between the trajectory polyline and a point obstacle.
///
/// Uses point-to-segment distance over consecutive samples so that the
/// result does not depend on how coarsely the path was sampled. The
/// distance is measured to the vehicle center point.
pub fn min_obstacle_distance(traj: &Trajectory, obstacle: (f64, f64)) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let pts: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.x_m, s.y_m)).collect();
    if pts.len() == 1 {
        let (x, y) = pts[0];
        return Ok(((obstacle.0 - x).powi(2) + (obstacle.1 - y).powi(2)).sqrt());
    }
    let mut best = f64::INFINITY;
    for w in pts.windows(2) {
        let d = point_segment_distance(obstacle, w[0], w[1]);
        if d < best {
            best = d;
        }
    }
    Ok(best)
}

//! Three-robot kinematic planning on gridded terrain.
//!
//! States are the three robots' planar positions. A state is admissible only
//! when robots 0–1 and 1–2 are each closer than `sep_p / 2`. Along a straight
//! joint motion every pairwise distance is convex in the interpolation
//! parameter, so admissible endpoints imply an admissible segment.

mod heightmap;
mod kpiece;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::Vec2;

pub use heightmap::{gradient_obstacles, Heightmap, ObstacleMask};
pub use kpiece::{plan, plan_with_stats, PlanStats};

/// Samples per segment used by every validity check.
pub const SEGMENT_SAMPLES: usize = 10;

pub type Joint = [Vec2; 3];

/// Strict `‖p0 − p1‖ < p/2` and `‖p1 − p2‖ < p/2`; the pair (0, 2) is only
/// bounded through the triangle inequality.
pub fn separation_ok(positions: &Joint, sep_p: f64) -> bool {
    let half = 0.5 * sep_p;
    (positions[0] - positions[1]).norm() < half && (positions[1] - positions[2]).norm() < half
}

pub fn centroid(q: &Joint) -> Vec2 {
    (q[0] + q[1] + q[2]) / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanProblem {
    pub starts: Joint,
    pub goals: Joint,
    /// Maximum team separation `p` (m).
    pub sep_p: f64,
    pub robot_radius: f64,
    pub payload_radius: f64,
    /// Longest single-robot move per edge (m).
    pub max_hop: f64,
    /// Wall-clock limit (s).
    pub time_budget: f64,
    /// Optional iteration cap, checked alongside the time budget.
    #[serde(default)]
    pub max_iterations: Option<usize>,
    /// Payload position relative to the robot centroid; `(0, -l_0)` models a
    /// payload trailing downslope on its tethers.
    #[serde(default = "Vec2::zeros")]
    pub payload_offset: Vec2,
}

impl PlanProblem {
    pub fn validate(&self) -> Result<()> {
        ensure(self.sep_p > 0.0, "sep_p", "must be positive")?;
        ensure(self.max_hop > 0.0, "max_hop", "must be positive")?;
        ensure(self.robot_radius >= 0.0, "robot_radius", "must be non-negative")?;
        ensure(self.payload_radius >= 0.0, "payload_radius", "must be non-negative")?;
        ensure(self.time_budget > 0.0, "time_budget", "must be positive")?;
        ensure(
            separation_ok(&self.starts, self.sep_p),
            "starts",
            "violate the separation constraint",
        )?;
        ensure(
            separation_ok(&self.goals, self.sep_p),
            "goals",
            "violate the separation constraint",
        )
    }

    /// Three robots in a line across the slope, 0.4·p apart, starting at
    /// (8, 1.5) and ending at (8, 14.5) on [`Heightmap::two_ridge`].
    pub fn two_ridge() -> Self {
        let line = |cx: f64, cy: f64| [Vec2::new(cx - 0.6, cy), Vec2::new(cx, cy), Vec2::new(cx + 0.6, cy)];
        Self {
            starts: line(8.0, 1.5),
            goals: line(8.0, 14.5),
            sep_p: 1.5,
            robot_radius: 0.15,
            payload_radius: 0.5,
            max_hop: 0.5,
            time_budget: 5.0,
            max_iterations: None,
            payload_offset: Vec2::zeros(),
        }
    }
}

/// Joint waypoints, the payload position at each, and the planner's
/// bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Joint>,
    pub payload: Vec<Vec2>,
}

impl Path {
    pub fn new(waypoints: Vec<Joint>, payload_offset: Vec2) -> Self {
        let payload = waypoints.iter().map(|q| centroid(q) + payload_offset).collect();
        Self { waypoints, payload }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn robot(&self, i: usize) -> Vec<Vec2> {
        self.waypoints.iter().map(|q| q[i]).collect()
    }

    pub fn centroid_length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| (centroid(&w[1]) - centroid(&w[0])).norm())
            .sum()
    }

    /// Columns `waypoint, x, y` for robot `i`.
    pub fn write_robot_csv<W: Write>(&self, i: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["waypoint", "x", "y"])?;
        for (k, p) in self.robot(i).iter().enumerate() {
            w.write_record([k.to_string(), p.x.to_string(), p.y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// First broken path invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PathViolation {
    Empty,
    Endpoint,
    Hop { segment: usize, robot: usize, length: f64 },
    Separation { segment: usize },
    RobotCollision { segment: usize, robot: usize },
    Payload { segment: usize },
}

/// Disk of `payload_radius` swept along the payload waypoints. Returns the
/// first segment that touches a blocked cell. A zero radius never collides.
pub fn validate_payload_path(path: &Path, mask: &ObstacleMask, payload_radius: f64) -> Option<usize> {
    if payload_radius <= 0.0 {
        return None;
    }
    if path.payload.len() == 1 && !mask.disk_free(&path.payload[0], payload_radius) {
        return Some(0);
    }
    path.payload
        .windows(2)
        .position(|w| !mask.capsule_free(&w[0], &w[1], payload_radius))
}

/// Robots at `samples + 1` evenly spaced points of the joint segment `a → b`
/// are collision-free.
pub(crate) fn joint_segment_free(a: &Joint, b: &Joint, mask: &ObstacleMask, radius: f64, samples: usize) -> Option<usize> {
    for s in 0..=samples {
        let t = s as f64 / samples as f64;
        for i in 0..3 {
            let p = a[i] + t * (b[i] - a[i]);
            if !mask.disk_free(&p, radius) {
                return Some(i);
            }
        }
    }
    None
}

/// Check every invariant a returned path must satisfy, at each waypoint and
/// at [`SEGMENT_SAMPLES`] interpolated samples per segment.
pub fn validate_path(path: &Path, problem: &PlanProblem, mask: &ObstacleMask) -> std::result::Result<(), PathViolation> {
    let (Some(first), Some(last)) = (path.waypoints.first(), path.waypoints.last()) else {
        return Err(PathViolation::Empty);
    };
    let close = |a: &Joint, b: &Joint| (0..3).all(|i| (a[i] - b[i]).norm() < 1e-9);
    if !close(first, &problem.starts) || !close(last, &problem.goals) {
        return Err(PathViolation::Endpoint);
    }
    if let Some(robot) = joint_segment_free(first, first, mask, problem.robot_radius, 1) {
        return Err(PathViolation::RobotCollision { segment: 0, robot });
    }
    for (segment, w) in path.waypoints.windows(2).enumerate() {
        for robot in 0..3 {
            let length = (w[1][robot] - w[0][robot]).norm();
            if length > problem.max_hop * (1.0 + 1e-9) {
                return Err(PathViolation::Hop { segment, robot, length });
            }
        }
        for s in 0..=SEGMENT_SAMPLES {
            let t = s as f64 / SEGMENT_SAMPLES as f64;
            let q: Joint = std::array::from_fn(|i| w[0][i] + t * (w[1][i] - w[0][i]));
            if !separation_ok(&q, problem.sep_p) {
                return Err(PathViolation::Separation { segment });
            }
        }
        if let Some(robot) = joint_segment_free(&w[0], &w[1], mask, problem.robot_radius, SEGMENT_SAMPLES) {
            return Err(PathViolation::RobotCollision { segment, robot });
        }
    }
    if let Some(segment) = validate_payload_path(path, mask, problem.payload_radius) {
        return Err(PathViolation::Payload { segment });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_cases() {
        let z = Vec2::zeros();
        assert!(separation_ok(&[z, z, z], 1.0));
        assert!(!separation_ok(&[Vec2::new(0.5, 0.0), z, z], 1.0));
        assert!(!separation_ok(&[z, z, Vec2::new(1.0, 0.0)], 1.0));
    }

    #[test]
    fn separation_ignores_the_outer_pair() {
        // 0 and 2 are 0.9 apart (> p/2) yet admissible; swapping 1 and 2 is not
        let q = [Vec2::new(0.0, 0.0), Vec2::new(0.45, 0.0), Vec2::new(0.9, 0.0)];
        assert!(separation_ok(&q, 1.0));
        assert!(!separation_ok(&[q[0], q[2], q[1]], 1.0));
    }

    #[test]
    fn zero_radius_payload_always_valid() {
        let hm = Heightmap::flat(4, 4, 1.0).unwrap();
        let mut mask = ObstacleMask::empty_like(&hm);
        mask.blocked.iter_mut().for_each(|b| *b = true);
        let q = [Vec2::new(1.0, 1.0); 3];
        let path = Path::new(vec![q, q], Vec2::zeros());
        assert_eq!(validate_payload_path(&path, &mask, 0.0), None);
        assert_eq!(validate_payload_path(&path, &mask, 0.1), Some(0));
    }
}

//! Waypoint refinement inside feasible disks.
//!
//! Every waypoint may slide anywhere within its feasible radius without
//! losing sight of its trees. Passes walk the closed tour in order and move
//! each waypoint to the sampled position that most lowers the weighted
//! distance + turning angle of the path around it, refusing moves that would
//! add a crossing.

use serde::{Deserialize, Serialize};

use crate::coverage::Waypoint;
use crate::error::{Error, Result};
use crate::evaluation::{path_metrics, QualityWeights};
use crate::geometry::{euclidean, properly_cross, turning_angle_or_zero, Point};

/// A candidate must beat the incumbent by more than this to be taken.
const MOVE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplanParams {
    pub radial_samples: usize,
    pub angular_samples: usize,
    pub max_passes: usize,
    pub improvement_tol: f64,
}

impl Default for ReplanParams {
    fn default() -> Self {
        ReplanParams { radial_samples: 5, angular_samples: 16, max_passes: 5, improvement_tol: 1e-6 }
    }
}

impl ReplanParams {
    pub fn validate(&self) -> Result<()> {
        if self.radial_samples < 1 {
            return Err(Error::invalid("replan radial_samples must be >= 1"));
        }
        if self.angular_samples < 4 {
            return Err(Error::invalid("replan angular_samples must be >= 4"));
        }
        if self.max_passes < 1 {
            return Err(Error::invalid("replan max_passes must be >= 1"));
        }
        if !(self.improvement_tol >= 0.0) {
            return Err(Error::invalid("replan improvement_tol must be >= 0"));
        }
        Ok(())
    }
}

/// The original center followed by a polar grid filling the feasible disk.
pub fn candidate_points(w: &Waypoint, params: &ReplanParams) -> Vec<Point> {
    let r_star = w.feasible_radius;
    let mut out = vec![w.center];
    if r_star <= 0.0 {
        return out;
    }
    for k in 1..=params.radial_samples {
        let radius = r_star * k as f64 / params.radial_samples as f64;
        for j in 0..params.angular_samples {
            let theta = std::f64::consts::TAU * j as f64 / params.angular_samples as f64;
            let c = Point::new(w.center.x + radius * theta.cos(), w.center.y + radius * theta.sin());
            // cos/sin rounding can push the outer ring a hair past r_star.
            let d = euclidean(c, w.center);
            out.push(if d > r_star {
                w.center + (c - w.center).scale(r_star / d)
            } else {
                c
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplanStats {
    pub passes: usize,
    pub moves: usize,
    /// Whether the last pass made no moves.
    pub converged: bool,
    pub objective_before: f64,
    pub objective_after: f64,
}

/// Weighted distance + turning angle of the closed tour.
pub fn smoothness_objective(points: &[Point], weights: &QualityWeights) -> f64 {
    if points.len() < 3 {
        let m = points.len();
        let d: f64 = (0..m).map(|k| euclidean(points[k], points[(k + 1) % m])).sum();
        return weights.alpha * d;
    }
    let m = path_metrics(points, true).expect(">= 3 points");
    weights.smoothness_cost(m.distance, m.angle)
}

/// Part of the objective that depends on the position of vertex `i`.
fn local_objective(pts: &[Point], i: usize, c: Point, w: &QualityWeights) -> f64 {
    let n = pts.len();
    let pp = pts[(i + n - 2) % n];
    let prev = pts[(i + n - 1) % n];
    let next = pts[(i + 1) % n];
    let nn = pts[(i + 2) % n];
    let dist = euclidean(prev, c) + euclidean(c, next);
    let angle = turning_angle_or_zero(pp, prev, c)
        + turning_angle_or_zero(prev, c, next)
        + turning_angle_or_zero(c, next, nn);
    w.smoothness_cost(dist, angle)
}

/// Crossings involving the two edges incident to vertex `i` when it sits at `c`.
fn incident_crossings(pts: &[Point], i: usize, c: Point) -> usize {
    let n = pts.len();
    let prev = pts[(i + n - 1) % n];
    let next = pts[(i + 1) % n];
    let mut count = 0;
    // Edge k joins k and k+1. Incident edges are i-1 and i.
    for k in 0..n {
        let (a, b) = (pts[k], pts[(k + 1) % n]);
        let touches_prev = k == (i + n - 2) % n || k == (i + n - 1) % n || k == i;
        let touches_next = k == (i + n - 1) % n || k == i || k == (i + 1) % n;
        if !touches_prev && properly_cross(prev, c, a, b) {
            count += 1;
        }
        if !touches_next && properly_cross(c, next, a, b) {
            count += 1;
        }
    }
    count
}

pub fn replan(tour: &[Waypoint], weights: &QualityWeights, params: &ReplanParams) -> Result<Vec<Waypoint>> {
    replan_with_stats(tour, weights, params).map(|(w, _)| w)
}

pub fn replan_with_stats(
    tour: &[Waypoint],
    weights: &QualityWeights,
    params: &ReplanParams,
) -> Result<(Vec<Waypoint>, ReplanStats)> {
    params.validate()?;
    let mut out: Vec<Waypoint> = tour.to_vec();
    let n = out.len();
    let mut pts: Vec<Point> = out.iter().map(|w| w.center).collect();
    let mut stats = ReplanStats {
        objective_before: smoothness_objective(&pts, weights),
        ..ReplanStats::default()
    };
    stats.objective_after = stats.objective_before;
    if n < 3 {
        stats.converged = true;
        return Ok((out, stats));
    }

    for _ in 0..params.max_passes {
        stats.passes += 1;
        let before = stats.objective_after;
        let mut moved = 0;
        for i in 0..n {
            if out[i].feasible_radius <= 0.0 {
                continue;
            }
            let here = pts[i];
            let base_cross = incident_crossings(&pts, i, here);
            let mut best_val = local_objective(&pts, i, here, weights);
            let mut best: Option<Point> = None;
            for c in candidate_points(&out[i], params).into_iter().skip(1) {
                let v = local_objective(&pts, i, c, weights);
                if v < best_val - MOVE_EPS && incident_crossings(&pts, i, c) <= base_cross {
                    best_val = v;
                    best = Some(c);
                }
            }
            if let Some(c) = best {
                let shift = euclidean(c, here);
                out[i].center = c;
                // The shrunken disk around the new center stays inside the old one.
                out[i].feasible_radius = (out[i].feasible_radius - shift).max(0.0);
                pts[i] = c;
                moved += 1;
            }
        }
        stats.moves += moved;
        stats.objective_after = smoothness_objective(&pts, weights);
        if moved == 0 {
            stats.converged = true;
            break;
        }
        if before - stats.objective_after < params.improvement_tol {
            break;
        }
    }
    Ok((out, stats))
}

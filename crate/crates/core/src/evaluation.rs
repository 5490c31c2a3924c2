//! Path metrics and the canonical cost every solver minimises when picking
//! its best tour, plus the shared exploration-rate schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{count_tour_intersections, euclidean, turning_angle_or_zero, Point};

/// Length in px, cumulative turning angle in degrees, and crossing count.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PathMetrics {
    pub distance: f64,
    pub angle: f64,
    pub intersections: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityWeights {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
}

impl Default for QualityWeights {
    fn default() -> Self {
        QualityWeights { alpha: 0.3, beta: 0.7, omega: 500.0 }
    }
}

impl QualityWeights {
    pub fn new(alpha: f64, beta: f64, omega: f64) -> Self {
        QualityWeights { alpha, beta, omega }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.omega];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("quality weights must be finite and >= 0"));
        }
        if all.iter().all(|w| *w == 0.0) {
            return Err(Error::invalid("quality weights must not all be zero"));
        }
        Ok(())
    }

    /// Weighted sum of distance and angle only.
    pub fn smoothness_cost(&self, distance: f64, angle: f64) -> f64 {
        self.alpha * distance + self.beta * angle
    }
}

/// Exponentially decaying exploration rate with a floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub eps_max: f64,
    pub eps_min: f64,
    pub lambda: f64,
}

impl EpsilonSchedule {
    /// Default schedule for a run of `iterations` steps: 0.9 down to 0.05 with
    /// `lambda = 5 / iterations`, so the floor is approached near the end.
    pub fn for_iterations(iterations: usize) -> Self {
        EpsilonSchedule {
            eps_max: 0.9,
            eps_min: 0.05,
            lambda: 5.0 / iterations.max(1) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.eps_min && self.eps_min <= self.eps_max && self.eps_max <= 1.0) {
            return Err(Error::invalid("epsilon schedule requires 0 <= eps_min <= eps_max <= 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("epsilon decay lambda must be finite and >= 0"));
        }
        Ok(())
    }
}

pub fn epsilon_at(schedule: &EpsilonSchedule, i: usize) -> f64 {
    let decayed = schedule.eps_max * (-schedule.lambda * i as f64).exp();
    decayed.max(schedule.eps_min).min(schedule.eps_max)
}

/// Metrics of a tour given as an ordered point list.
///
/// Closed tours include the closing edge and charge a turning angle at every
/// vertex; open paths charge interior vertices only.
pub fn path_metrics(tour: &[Point], closed: bool) -> Result<PathMetrics> {
    let n = tour.len();
    if closed && n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    if n == 0 {
        return Ok(PathMetrics::default());
    }
    let edges = if closed { n } else { n - 1 };
    let distance = (0..edges).map(|k| euclidean(tour[k], tour[(k + 1) % n])).sum();
    let angle = if closed {
        (0..n)
            .map(|k| turning_angle_or_zero(tour[(k + n - 1) % n], tour[k], tour[(k + 1) % n]))
            .sum()
    } else {
        (1..n.saturating_sub(1))
            .map(|k| turning_angle_or_zero(tour[k - 1], tour[k], tour[k + 1]))
            .sum()
    };
    Ok(PathMetrics {
        distance,
        angle,
        intersections: count_tour_intersections(tour, closed),
    })
}

pub fn canonical_cost(m: &PathMetrics, w: &QualityWeights) -> f64 {
    w.alpha * m.distance + w.beta * m.angle + w.omega * m.intersections as f64
}

/// Metrics of a closed loop through `points`, accepting the degenerate
/// one- and two-point loops (no angle, out-and-back distance).
pub fn closed_metrics(points: &[Point]) -> PathMetrics {
    match points.len() {
        0 | 1 => PathMetrics::default(),
        2 => PathMetrics {
            distance: 2.0 * euclidean(points[0], points[1]),
            angle: 0.0,
            intersections: 0,
        },
        _ => path_metrics(points, true).expect("closed tour with >= 3 points"),
    }
}

/// Metrics of a closed tour over `nodes` in the given visiting order.
pub fn order_metrics(nodes: &[Point], order: &[usize]) -> PathMetrics {
    let pts: Vec<Point> = order.iter().map(|&i| nodes[i]).collect();
    closed_metrics(&pts)
}

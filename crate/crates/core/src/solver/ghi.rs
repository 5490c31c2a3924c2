//! Greedy heuristic insertion.
//!
//! Seeds a triangle from a random node and its two nearest neighbours, then
//! inserts the remaining nodes in random order, each at the position with the
//! smallest increase in weighted distance + turning angle + crossings.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::QualityWeights;
use crate::geometry::{euclidean, properly_cross, turning_angle_or_zero, Point};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhiParams {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    /// Supplied per run; not part of the configuration file.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for GhiParams {
    fn default() -> Self {
        GhiParams { alpha: 0.3, beta: 0.7, omega: 500.0, seed: 0 }
    }
}

impl GhiParams {
    pub fn weights(&self) -> QualityWeights {
        QualityWeights::new(self.alpha, self.beta, self.omega)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.alpha, self.beta, self.omega].iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("GHI weights must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Crossings of segment `a-b` against the edges of the closed tour, skipping
/// edges listed in `skip` (by index of their first vertex).
fn crossings_against(nodes: &[Point], tour: &[usize], a: Point, b: Point, skip: [usize; 2]) -> i64 {
    let n = tour.len();
    (0..n)
        .filter(|k| !skip.contains(k))
        .filter(|&k| properly_cross(a, b, nodes[tour[k]], nodes[tour[(k + 1) % n]]))
        .count() as i64
}

/// Change in weighted cost from inserting `candidate` between `tour[position]`
/// and `tour[position + 1]` (wrapping).
///
/// Only the three vertices whose turning angles change and the edges touching
/// the replaced edge are re-evaluated.
pub fn insertion_delta(
    nodes: &[Point],
    tour: &[usize],
    position: usize,
    candidate: usize,
    weights: &QualityWeights,
) -> f64 {
    let n = tour.len();
    debug_assert!(n >= 2 && position < n);
    let a_i = position;
    let b_i = (position + 1) % n;
    let a = nodes[tour[a_i]];
    let b = nodes[tour[b_i]];
    let c = nodes[candidate];

    let dd = euclidean(a, c) + euclidean(c, b) - euclidean(a, b);

    let mut d_angle = 0.0;
    let mut d_cross = 0i64;
    if n >= 3 {
        let pa = nodes[tour[(a_i + n - 1) % n]];
        let nb = nodes[tour[(b_i + 1) % n]];
        if weights.beta != 0.0 {
            let before = turning_angle_or_zero(pa, a, b) + turning_angle_or_zero(a, b, nb);
            let after = turning_angle_or_zero(pa, a, c)
                + turning_angle_or_zero(a, c, b)
                + turning_angle_or_zero(c, b, nb);
            d_angle = after - before;
        }
        if weights.omega != 0.0 {
            let prev_edge = (a_i + n - 1) % n;
            let next_edge = b_i;
            // Old edge a-b against everything not touching it.
            let lost = crossings_against(nodes, tour, a, b, [prev_edge, next_edge]);
            // New edges a-c and c-b; a-b itself disappears.
            let gained = crossings_against(nodes, tour, a, c, [prev_edge, a_i])
                + crossings_against(nodes, tour, c, b, [a_i, next_edge]);
            d_cross = gained - lost;
        }
    } else {
        // Two-node loop a->b->a becomes the triangle a->c->b->a.
        d_angle = if weights.beta != 0.0 {
            turning_angle_or_zero(b, a, c) + turning_angle_or_zero(a, c, b) + turning_angle_or_zero(c, b, a)
                - turning_angle_or_zero(b, a, b)
                - turning_angle_or_zero(a, b, a)
        } else {
            0.0
        };
    }
    weights.alpha * dd + weights.beta * d_angle + weights.omega * d_cross as f64
}

pub fn solve_ghi(nodes: &[Point], params: &GhiParams) -> Result<Vec<usize>> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::EmptyInput("GHI needs at least one node"));
    }
    params.validate()?;
    if n <= 2 {
        return Ok((0..n).collect());
    }
    let weights = params.weights();
    let mut rng = rng::seeded(params.seed);
    let start = rng.random_range(0..n);

    let mut by_dist: Vec<usize> = (0..n).filter(|&i| i != start).collect();
    by_dist.sort_by(|&i, &j| {
        euclidean(nodes[start], nodes[i])
            .total_cmp(&euclidean(nodes[start], nodes[j]))
            .then(i.cmp(&j))
    });
    let mut tour = vec![start, by_dist[0], by_dist[1]];
    let mut remaining: Vec<usize> = by_dist[2..].to_vec();
    remaining.sort_unstable();
    remaining.shuffle(&mut rng);

    for cand in remaining {
        let mut best_pos = 0;
        let mut best = f64::INFINITY;
        for pos in 0..tour.len() {
            let delta = insertion_delta(nodes, &tour, pos, cand, &weights);
            if delta < best {
                best = delta;
                best_pos = pos;
            }
        }
        tour.insert(best_pos + 1, cand);
    }
    Ok(tour)
}

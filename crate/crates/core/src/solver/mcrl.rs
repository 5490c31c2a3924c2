//! Tabular Monte Carlo control over an `n x n` Q-table indexed by
//! (current node, next node).
//!
//! Each episode builds a closed tour epsilon-greedily from Q, scores every
//! step with a distance / smoothness / crossing reward, propagates discounted
//! returns backwards, and moves each visited Q entry to the running mean of
//! its returns (step size `1 / visits`).

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{canonical_cost, epsilon_at, order_metrics, EpsilonSchedule, QualityWeights};
use crate::geometry::{turning_angle_or_zero, DistanceMatrix, Point};
use crate::rng::{self, Rng};
use crate::solver::{new_edge_crossings, TourScore};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McrlParams {
    /// Weight on the distance reward.
    pub alpha: f64,
    /// Weight on the smoothness reward.
    pub beta: f64,
    /// Weight on the crossing reward.
    pub omega: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Decay of the crossing reward per new crossing.
    pub zeta: f64,
    pub episodes: usize,
    pub schedule: EpsilonSchedule,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for McrlParams {
    fn default() -> Self {
        let episodes = 5000;
        McrlParams {
            alpha: 0.3,
            beta: 0.7,
            omega: 500.0,
            gamma: 0.2,
            zeta: 1.0,
            episodes,
            schedule: EpsilonSchedule::for_iterations(episodes),
            seed: 0,
        }
    }
}

impl McrlParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid("MCRL discount gamma must lie in [0, 1]"));
        }
        if self.episodes == 0 {
            return Err(Error::invalid("MCRL needs at least one episode"));
        }
        let w = [self.alpha, self.beta, self.omega, self.zeta];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("MCRL weights and zeta must be finite and >= 0"));
        }
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub n: usize,
    pub values: Vec<f64>,
    pub visits: Vec<u64>,
}

impl QTable {
    pub fn new(n: usize) -> Self {
        QTable { n, values: vec![0.0; n * n], visits: vec![0; n * n] }
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n + a]
    }

    pub fn visit_count(&self, s: usize, a: usize) -> u64 {
        self.visits[s * self.n + a]
    }

    /// Count the visit first, then step towards `g` by `1 / visits`.
    pub fn update(&mut self, s: usize, a: usize, g: f64) {
        debug_assert!(s != a);
        let k = s * self.n + a;
        self.visits[k] += 1;
        let eta = 1.0 / self.visits[k] as f64;
        self.values[k] += eta * (g - self.values[k]);
    }
}

pub fn update_q(q: &mut QTable, s: usize, a: usize, g: f64) {
    q.update(s, a, g);
}

/// `G_t = r_t + gamma * G_{t+1}`, computed from the back.
pub fn returns_backward(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut g = 0.0;
    for t in (0..rewards.len()).rev() {
        g = rewards[t] + gamma * g;
        out[t] = g;
    }
    out
}

/// Reward for stepping `cur -> next`.
///
/// `alpha * (1 - d / d_max) + beta * (1 - angle / 180)^2 + omega * exp(-zeta * new_crossings)`.
/// Without a previous node the smoothness term is 1.
pub fn step_reward(
    prev: Option<Point>,
    cur: Point,
    next: Point,
    new_crossings: usize,
    params: &McrlParams,
    d_max: f64,
) -> f64 {
    let d = cur.dist(&next);
    let d_reward = if d_max > 0.0 { 1.0 - d / d_max } else { 1.0 };
    let a_reward = match prev {
        Some(p) => {
            let x = 1.0 - turning_angle_or_zero(p, cur, next) / 180.0;
            x * x
        }
        None => 1.0,
    };
    let n_reward = (-params.zeta * new_crossings as f64).exp();
    params.alpha * d_reward + params.beta * a_reward + params.omega * n_reward
}

/// Per-step rewards for a closed tour; the last entry is the closing step.
pub fn episode_rewards(nodes: &[Point], tour: &[usize], params: &McrlParams, d_max: f64) -> Vec<f64> {
    let n = tour.len();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let closing = t + 1 == n;
        let cur = tour[t];
        let next = tour[(t + 1) % n];
        let prev = (t > 0).then(|| nodes[tour[t - 1]]);
        let crossings = if params.omega != 0.0 {
            new_edge_crossings(nodes, &tour[..=t], next, closing)
        } else {
            0
        };
        out.push(step_reward(prev, nodes[cur], nodes[next], crossings, params, d_max));
    }
    out
}

fn greedy_action(q: &QTable, s: usize, visited: &[bool]) -> usize {
    let mut best: Option<usize> = None;
    for a in 0..q.n {
        if visited[a] {
            continue;
        }
        if best.is_none_or(|b| q.get(s, a) > q.get(s, b)) {
            best = Some(a);
        }
    }
    best.expect("at least one unvisited node")
}

fn construct(q: &QTable, epsilon: f64, rng: &mut Rng) -> Vec<usize> {
    let n = q.n;
    let start = rng.random_range(0..n);
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut tour = vec![start];
    let mut s = start;
    while tour.len() < n {
        let a = if rng.random::<f64>() < epsilon {
            let open: Vec<usize> = (0..n).filter(|&j| !visited[j]).collect();
            open[rng.random_range(0..open.len())]
        } else {
            greedy_action(q, s, &visited)
        };
        visited[a] = true;
        tour.push(a);
        s = a;
    }
    tour
}

#[derive(Debug, Clone, Default)]
pub struct McrlTrace {
    /// Best canonical cost after each episode.
    pub best_cost: Vec<f64>,
    /// Tour built in each episode (only kept when requested).
    pub episodes: Vec<Vec<usize>>,
}

pub fn solve_mcrl(nodes: &[Point], params: &McrlParams, quality: &QualityWeights) -> Result<Vec<usize>> {
    solve_mcrl_traced(nodes, params, quality, false).map(|(t, _, _)| t)
}

/// Full run returning the best tour, the learned table and a trace.
pub fn solve_mcrl_traced(
    nodes: &[Point],
    params: &McrlParams,
    quality: &QualityWeights,
    keep_episodes: bool,
) -> Result<(Vec<usize>, QTable, McrlTrace)> {
    let score = |tour: &[usize]| canonical_cost(&order_metrics(nodes, tour), quality);
    solve_mcrl_scored(nodes, params, &score, keep_episodes)
}

/// As [`solve_mcrl_traced`], with the best episode picked by `score`
/// (lower is better) instead of the node-tour canonical cost.
pub fn solve_mcrl_scored(
    nodes: &[Point],
    params: &McrlParams,
    score: &TourScore<'_>,
    keep_episodes: bool,
) -> Result<(Vec<usize>, QTable, McrlTrace)> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::EmptyInput("MCRL needs at least one node"));
    }
    params.validate()?;
    let mut q = QTable::new(n);
    if n <= 3 {
        return Ok(((0..n).collect(), q, McrlTrace::default()));
    }
    let d_max = DistanceMatrix::from_points(nodes).max();
    let mut rng = rng::seeded(params.seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut trace = McrlTrace::default();

    for episode in 0..params.episodes {
        let eps = epsilon_at(&params.schedule, episode);
        let tour = construct(&q, eps, &mut rng);
        let rewards = episode_rewards(nodes, &tour, params, d_max);
        let returns = returns_backward(&rewards, params.gamma);
        for t in (0..n).rev() {
            q.update(tour[t], tour[(t + 1) % n], returns[t]);
        }
        let cost = score(&tour);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, tour.clone()));
        }
        trace.best_cost.push(best.as_ref().map(|b| b.0).unwrap_or(f64::INFINITY));
        if keep_episodes {
            trace.episodes.push(tour);
        }
    }
    Ok((best.expect("at least one episode").1, q, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn smoothness_reward_values() {
        let params = McrlParams { alpha: 0.0, omega: 0.0, beta: 1.0, ..McrlParams::default() };
        let r = |prev: Point, next: Point| step_reward(Some(prev), p(0.0, 0.0), next, 0, &params, 10.0);
        assert!((r(p(-1.0, 0.0), p(1.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((r(p(-1.0, 0.0), p(0.0, 1.0)) - 0.25).abs() < 1e-12);
        assert!(r(p(-1.0, 0.0), p(-2.0, 0.0)).abs() < 1e-12);
        assert_eq!(step_reward(None, p(0.0, 0.0), p(1.0, 0.0), 0, &params, 10.0), 1.0);
    }

    #[test]
    fn crossing_and_distance_rewards() {
        let params = McrlParams { alpha: 0.0, beta: 0.0, omega: 1.0, ..McrlParams::default() };
        assert_eq!(step_reward(None, p(0.0, 0.0), p(1.0, 0.0), 0, &params, 10.0), 1.0);
        assert!((step_reward(None, p(0.0, 0.0), p(1.0, 0.0), 2, &params, 10.0) - (-2.0f64).exp()).abs() < 1e-15);
        let params = McrlParams { alpha: 1.0, beta: 0.0, omega: 0.0, ..McrlParams::default() };
        assert_eq!(step_reward(None, p(3.0, 3.0), p(3.0, 3.0), 0, &params, 10.0), 1.0);
        assert!((step_reward(None, p(0.0, 0.0), p(4.0, 0.0), 0, &params, 10.0) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn backward_returns() {
        let g = returns_backward(&[1.0, 1.0, 1.0], 0.2);
        let expected = [1.24, 1.2, 1.0];
        for (a, b) in g.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(returns_backward(&[3.0, -1.0, 2.0], 0.0), vec![3.0, -1.0, 2.0]);
    }

    #[test]
    fn q_running_mean() {
        let mut q = QTable::new(3);
        update_q(&mut q, 0, 1, 10.0);
        assert_eq!(q.get(0, 1), 10.0);
        assert_eq!(q.visit_count(0, 1), 1);
        update_q(&mut q, 0, 1, 0.0);
        assert_eq!(q.get(0, 1), 5.0);
        assert_eq!(q.get(1, 0), 0.0);
    }

    #[test]
    fn single_episode_returns_constructed_tour() {
        let nodes: Vec<Point> = (0..7).map(|k| p((k * 41 % 13) as f64 * 7.0, (k * 17 % 5) as f64 * 9.0)).collect();
        let params = McrlParams { episodes: 1, seed: 4, ..McrlParams::default() };
        let (best, _, trace) = solve_mcrl_traced(&nodes, &params, &QualityWeights::default(), true).unwrap();
        assert_eq!(trace.episodes.len(), 1);
        assert_eq!(best, trace.episodes[0]);
    }
}

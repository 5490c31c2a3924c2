//! Ant colony optimisation with turning-angle and crossing rewards folded
//! into the transition attractiveness.
//!
//! Ants choose greedily (highest transition probability) except with an
//! exploration probability that decays over iterations. After each
//! iteration every ant deposits `Q / L` on the edges it used, where `L` is
//! its tour length. The returned tour is the lowest canonical cost seen.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{canonical_cost, epsilon_at, order_metrics, EpsilonSchedule, QualityWeights};
use crate::geometry::{turning_angle_or_zero, DistanceMatrix, Point};
use crate::rng::{self, Rng};
use crate::solver::{new_edge_crossings, TourScore};

/// Lower bound on any pheromone entry.
pub const PHEROMONE_FLOOR: f64 = 1e-12;
/// Keeps `1 / d` finite for coincident nodes.
const ETA_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcoParams {
    /// Exponent on the distance heuristic.
    pub alpha: f64,
    /// Exponent on the turning-angle reward.
    pub beta: f64,
    /// Exponent on the crossing reward.
    pub omega: f64,
    /// Exponent on the pheromone level.
    pub zeta: f64,
    /// Evaporation rate.
    pub rho: f64,
    /// Pheromone deposit constant.
    pub q: f64,
    pub ants: usize,
    pub iterations: usize,
    /// Decay of the crossing reward per new crossing.
    pub mu: f64,
    pub schedule: EpsilonSchedule,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for AcoParams {
    fn default() -> Self {
        let iterations = 200;
        AcoParams {
            alpha: 1.0,
            beta: 1.0,
            omega: 4.0,
            zeta: 1.0,
            rho: 0.3,
            q: 1000.0,
            ants: 100,
            iterations,
            mu: 1.0,
            schedule: EpsilonSchedule::for_iterations(iterations),
            seed: 0,
        }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid("ACO evaporation rate must satisfy 0 < rho < 1"));
        }
        if self.ants == 0 || self.iterations == 0 {
            return Err(Error::invalid("ACO needs at least one ant and one iteration"));
        }
        let exps = [self.alpha, self.beta, self.omega, self.zeta, self.mu];
        if exps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::invalid("ACO exponents and mu must be finite and >= 0"));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::invalid("ACO pheromone constant Q must be > 0"));
        }
        self.schedule.validate()
    }
}

/// Symmetric pheromone levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneMatrix {
    n: usize,
    tau: Vec<f64>,
}

impl PheromoneMatrix {
    pub fn uniform(n: usize, value: f64) -> Self {
        PheromoneMatrix { n, tau: vec![value; n * n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    fn add_symmetric(&mut self, i: usize, j: usize, v: f64) {
        self.tau[i * self.n + j] += v;
        if i != j {
            self.tau[j * self.n + i] += v;
        }
    }
}

/// Precomputed per-run quantities.
pub struct Colony<'a> {
    nodes: &'a [Point],
    dist: DistanceMatrix,
    eta: Vec<f64>,
    params: AcoParams,
}

impl<'a> Colony<'a> {
    pub fn new(nodes: &'a [Point], params: AcoParams) -> Self {
        let n = nodes.len();
        let dist = DistanceMatrix::from_points(nodes);
        let dmax = dist.max();
        let mut eta = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let norm = if dmax > 0.0 { dist.get(i, j) / dmax } else { 0.0 };
                eta[i * n + j] = 1.0 / (norm + ETA_EPS);
            }
        }
        Colony { nodes, dist, eta, params }
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dist
    }

    /// Attractiveness of moving from the end of `path` to `j`:
    /// `tau^zeta * eta^alpha * (1 / (1 + angle))^beta * exp(-mu * new_crossings)^omega`.
    pub fn attractiveness(&self, path: &[usize], j: usize, tau: &PheromoneMatrix) -> f64 {
        let p = &self.params;
        let n = self.nodes.len();
        let i = *path.last().expect("non-empty partial path");
        let mut a = tau.get(i, j).powf(p.zeta) * self.eta[i * n + j].powf(p.alpha);
        if p.beta != 0.0 && path.len() >= 2 {
            let prev = path[path.len() - 2];
            let delta = turning_angle_or_zero(self.nodes[prev], self.nodes[i], self.nodes[j]);
            a *= (1.0 / (1.0 + delta)).powf(p.beta);
        }
        if p.omega != 0.0 && p.mu != 0.0 {
            let crossings = new_edge_crossings(self.nodes, path, j, false);
            a *= (-p.mu * crossings as f64).exp().powf(p.omega);
        }
        a
    }

    /// Build one closed tour from a random start.
    pub fn construct(&self, tau: &PheromoneMatrix, epsilon: f64, rng: &mut Rng) -> Vec<usize> {
        let n = self.nodes.len();
        let start = rng.random_range(0..n);
        let mut path = Vec::with_capacity(n);
        path.push(start);
        let mut visited = vec![false; n];
        visited[start] = true;
        let mut candidates: Vec<usize> = Vec::with_capacity(n);
        let mut weights: Vec<f64> = Vec::with_capacity(n);
        while path.len() < n {
            candidates.clear();
            candidates.extend((0..n).filter(|&j| !visited[j]));
            weights.clear();
            weights.extend(candidates.iter().map(|&j| self.attractiveness(&path, j, tau)));
            let probs = transition_probabilities(&weights);
            let pick = candidates[transition_select(probs.as_deref(), candidates.len(), epsilon, rng)];
            visited[pick] = true;
            path.push(pick);
        }
        path
    }
}

/// Normalised transition probabilities, or `None` when every attractiveness
/// is zero (or the sum is not finite).
pub fn transition_probabilities(attractiveness: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = attractiveness.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    Some(attractiveness.iter().map(|a| a / total).collect())
}

/// Epsilon-greedy choice over `count` candidates: uniform with probability
/// `epsilon`, otherwise the highest probability (lowest index on ties).
/// Without usable probabilities the choice is uniform.
pub fn transition_select(probs: Option<&[f64]>, count: usize, epsilon: f64, rng: &mut Rng) -> usize {
    debug_assert!(count > 0);
    let explore = rng.random::<f64>() < epsilon;
    match probs {
        Some(p) if !explore => {
            let mut best = 0;
            for k in 1..p.len() {
                if p[k] > p[best] {
                    best = k;
                }
            }
            best
        }
        _ => rng.random_range(0..count),
    }
}

/// Evaporate everything by `1 - rho`, then deposit `q / L` on both directions
/// of every edge of each closed tour. Zero-length tours deposit nothing.
pub fn pheromone_update(tau: &mut PheromoneMatrix, tours: &[(Vec<usize>, f64)], rho: f64, q: f64) {
    for v in tau.tau.iter_mut() {
        *v *= 1.0 - rho;
    }
    for (tour, length) in tours {
        if *length <= 0.0 || tour.len() < 2 {
            continue;
        }
        let dep = q / length;
        for k in 0..tour.len() {
            tau.add_symmetric(tour[k], tour[(k + 1) % tour.len()], dep);
        }
    }
    for v in tau.tau.iter_mut() {
        *v = v.max(PHEROMONE_FLOOR);
    }
}

/// Per-run trace, useful for checking the elitist record.
#[derive(Debug, Clone, Default)]
pub struct AcoTrace {
    /// Best canonical cost after each iteration.
    pub best_cost: Vec<f64>,
}

pub fn solve_aco(nodes: &[Point], params: &AcoParams, quality: &QualityWeights) -> Result<Vec<usize>> {
    solve_aco_traced(nodes, params, quality).map(|(t, _)| t)
}

pub fn solve_aco_traced(
    nodes: &[Point],
    params: &AcoParams,
    quality: &QualityWeights,
) -> Result<(Vec<usize>, AcoTrace)> {
    let score = |tour: &[usize]| canonical_cost(&order_metrics(nodes, tour), quality);
    solve_aco_scored(nodes, params, &score)
}

/// As [`solve_aco_traced`], with the best tour picked by `score` (lower is
/// better). Pheromone deposits still use the node-tour length.
pub fn solve_aco_scored(nodes: &[Point], params: &AcoParams, score: &TourScore<'_>) -> Result<(Vec<usize>, AcoTrace)> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::EmptyInput("ACO needs at least one node"));
    }
    params.validate()?;
    if n <= 3 {
        return Ok(((0..n).collect(), AcoTrace::default()));
    }
    let colony = Colony::new(nodes, *params);
    let mut tau = PheromoneMatrix::uniform(n, 1.0);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut trace = AcoTrace::default();

    for it in 0..params.iterations {
        let eps = epsilon_at(&params.schedule, it);
        let tours: Vec<(Vec<usize>, f64)> = (0..params.ants)
            .into_par_iter()
            .map(|ant| {
                let stream = ((it as u64) << 32) | ant as u64;
                let mut rng = rng::seeded(rng::derive(params.seed, stream));
                let tour = colony.construct(&tau, eps, &mut rng);
                let len = colony.dist.tour_length(&tour);
                (tour, len)
            })
            .collect();

        for (tour, _) in &tours {
            let cost = score(tour);
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, tour.clone()));
            }
        }
        trace.best_cost.push(best.as_ref().map(|b| b.0).unwrap_or(f64::INFINITY));
        pheromone_update(&mut tau, &tours, params.rho, params.q);
    }
    Ok((best.expect("at least one ant ran").1, trace))
}

//! Greedy placement of camera-footprint disks over sparse trees, and the
//! feasible radius inside which a waypoint may move without losing any of
//! its trees.
//!
//! A tree of crown radius `r` is seen from a footprint of radius `R` when its
//! whole crown lies inside the footprint, i.e. the center distance is at most
//! `R - r`.

use std::collections::BTreeSet;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean, Point};
use crate::rng;

/// Inclusive boundary tolerance for the footprint test, in px.
pub const COVER_TOL: f64 = 1e-9;

pub type TreeId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub id: TreeId,
    pub center: Point,
    pub radius: f64,
}

impl Tree {
    pub fn new(id: TreeId, x: f64, y: f64, radius: f64) -> Self {
        Tree { id, center: Point::new(x, y), radius }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub id: usize,
    pub center: Point,
    /// Trees this waypoint is responsible for.
    pub covered: BTreeSet<TreeId>,
    /// Radius around `center` within which every covered tree stays covered.
    /// Zero pins the waypoint in place.
    pub feasible_radius: f64,
}

impl Waypoint {
    /// A waypoint that replanning must not move.
    pub fn pinned(id: usize, center: Point) -> Self {
        Waypoint { id, center, covered: BTreeSet::new(), feasible_radius: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageParams {
    /// Camera footprint radius `R`.
    pub fov_radius: f64,
    /// Default crown radius `r`.
    pub crown_radius: f64,
    /// Pitch of the candidate-center grid.
    pub grid_step: f64,
}

impl Default for CoverageParams {
    fn default() -> Self {
        CoverageParams { fov_radius: 175.0, crown_radius: 50.0, grid_step: 10.0 }
    }
}

impl CoverageParams {
    pub fn reach(&self) -> f64 {
        self.fov_radius - self.crown_radius
    }

    pub fn validate(&self) -> Result<()> {
        let CoverageParams { fov_radius, crown_radius, grid_step } = *self;
        if !(crown_radius > 0.0 && fov_radius > crown_radius && fov_radius.is_finite()) {
            return Err(Error::invalid("coverage requires R > r > 0"));
        }
        if !(grid_step > 0.0 && grid_step <= fov_radius - crown_radius) {
            return Err(Error::invalid("coverage requires 0 < grid_step <= R - r"));
        }
        Ok(())
    }
}

/// Distance budget between a footprint center and this tree's center.
fn tree_reach(tree: &Tree, params: &CoverageParams) -> f64 {
    params.fov_radius - tree.radius
}

pub fn covers(waypoint_center: Point, tree: &Tree, params: &CoverageParams) -> bool {
    euclidean(waypoint_center, tree.center) <= tree_reach(tree, params) + COVER_TOL
}

/// Candidate centers on a square grid of pitch `step` clipped to the disk of
/// radius `reach` around `anchor`. The anchor itself is always a candidate.
fn candidate_grid(anchor: Point, reach: f64, step: f64) -> Vec<Point> {
    let k = (reach / step).floor() as i64;
    let mut out = Vec::with_capacity(((2 * k + 1) * (2 * k + 1)) as usize);
    for i in -k..=k {
        for j in -k..=k {
            let dx = i as f64 * step;
            let dy = j as f64 * step;
            if dx.hypot(dy) <= reach + COVER_TOL {
                out.push(Point::new(anchor.x + dx, anchor.y + dy));
            }
        }
    }
    out
}

/// Ranking key for a candidate: more new trees first, then closer to the
/// anchor, then lexicographic position.
fn better(
    count: usize,
    dist: f64,
    p: Point,
    best: &(usize, f64, Point),
) -> bool {
    if count != best.0 {
        return count > best.0;
    }
    if dist != best.1 {
        return dist < best.1;
    }
    (p.x, p.y) < (best.2.x, best.2.y)
}

/// Greedy disk cover: every tree ends up assigned to exactly one waypoint
/// that covers it.
///
/// Starts at a seeded random tree; each step scores the grid candidates
/// around the current anchor by how many uncovered trees they would cover,
/// then moves the anchor to the uncovered tree nearest the old one.
pub fn greedy_cover(trees: &[Tree], params: &CoverageParams, seed: u64) -> Result<Vec<Waypoint>> {
    if trees.is_empty() {
        return Err(Error::EmptyInput("greedy_cover needs at least one tree"));
    }
    params.validate()?;
    if let Some(t) = trees.iter().find(|t| !(t.radius > 0.0 && t.radius < params.fov_radius)) {
        return Err(Error::invalid(format!(
            "tree {} has crown radius {} outside (0, R)",
            t.id, t.radius
        )));
    }

    let mut rng = rng::seeded(seed);
    let mut uncovered = vec![true; trees.len()];
    let mut remaining = trees.len();
    let mut anchor = rng.random_range(0..trees.len());
    let mut waypoints = Vec::new();
    let max_reach = trees
        .iter()
        .map(|t| tree_reach(t, params))
        .fold(0.0_f64, f64::max);

    while remaining > 0 {
        let a = trees[anchor].center;
        let reach = tree_reach(&trees[anchor], params);
        // Only uncovered trees that some candidate could reach.
        let nearby: Vec<usize> = (0..trees.len())
            .filter(|&j| uncovered[j] && euclidean(a, trees[j].center) <= reach + max_reach + COVER_TOL)
            .collect();

        let mut best = (0usize, f64::INFINITY, a);
        for c in candidate_grid(a, reach, params.grid_step) {
            let count = nearby.iter().filter(|&&j| covers(c, &trees[j], params)).count();
            let dist = euclidean(a, c);
            if better(count, dist, c, &best) {
                best = (count, dist, c);
            }
        }

        let center = best.2;
        let mut covered = BTreeSet::new();
        for &j in &nearby {
            if covers(center, &trees[j], params) {
                covered.insert(trees[j].id);
                uncovered[j] = false;
                remaining -= 1;
            }
        }
        debug_assert!(!covered.is_empty(), "anchor is always coverable");
        let mut w = Waypoint { id: waypoints.len(), center, covered, feasible_radius: 0.0 };
        w.feasible_radius = feasible_radius_of(&w, trees.iter().filter(|t| w.covered.contains(&t.id)), params)?;
        waypoints.push(w);

        if remaining == 0 {
            break;
        }
        anchor = (0..trees.len())
            .filter(|&j| uncovered[j])
            .min_by(|&i, &j| {
                euclidean(a, trees[i].center)
                    .total_cmp(&euclidean(a, trees[j].center))
                    .then(i.cmp(&j))
            })
            .expect("remaining > 0");
    }
    Ok(waypoints)
}

fn feasible_radius_of<'a>(
    w: &Waypoint,
    covered: impl Iterator<Item = &'a Tree>,
    params: &CoverageParams,
) -> Result<f64> {
    let slack = covered
        .map(|t| tree_reach(t, params) - euclidean(t.center, w.center))
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))));
    match slack {
        Some(s) => Ok(s.max(0.0)),
        None => Err(Error::EmptyInput("waypoint covers no trees")),
    }
}

/// `R - max_j |P_j - W| - r`, clamped at zero. With per-tree crown radii the
/// tightest tree decides.
pub fn feasible_radius(w: &Waypoint, trees: &[Tree], params: &CoverageParams) -> Result<f64> {
    if w.covered.is_empty() {
        return Err(Error::EmptyInput("waypoint covers no trees"));
    }
    let found: Vec<&Tree> = trees.iter().filter(|t| w.covered.contains(&t.id)).collect();
    if found.len() != w.covered.len() {
        return Err(Error::invalid(format!("waypoint {} references unknown tree ids", w.id)));
    }
    feasible_radius_of(w, found.into_iter(), params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> CoverageParams {
        CoverageParams::default()
    }

    #[test]
    fn covers_boundary() {
        let p = params();
        let t = Tree::new(0, 0.0, 0.0, 50.0);
        assert!(covers(Point::new(0.0, 0.0), &t, &p));
        assert!(covers(Point::new(125.0, 0.0), &t, &p));
        assert!(!covers(Point::new(126.0, 0.0), &t, &p));
    }

    #[test]
    fn single_tree_single_waypoint() {
        let trees = [Tree::new(7, 10.0, 20.0, 50.0)];
        let w = greedy_cover(&trees, &params(), 1).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].covered.contains(&7));
        // Anchor itself wins the tie on distance.
        assert_eq!(w[0].center, Point::new(10.0, 20.0));
        assert!((w[0].feasible_radius - 125.0).abs() < 1e-12);
    }

    #[test]
    fn far_apart_trees_need_two() {
        let trees = [Tree::new(0, 0.0, 0.0, 50.0), Tree::new(1, 600.0, 0.0, 50.0)];
        assert_eq!(greedy_cover(&trees, &params(), 3).unwrap().len(), 2);
    }

    #[test]
    fn empty_and_bad_inputs() {
        assert!(greedy_cover(&[], &params(), 0).is_err());
        let bad = CoverageParams { fov_radius: 40.0, ..params() };
        assert!(greedy_cover(&[Tree::new(0, 0.0, 0.0, 50.0)], &bad, 0).is_err());
        let bad_step = CoverageParams { grid_step: 0.0, ..params() };
        assert!(bad_step.validate().is_err());
    }

    #[test]
    fn feasible_radius_substitution() {
        let p = params();
        let trees = [
            Tree::new(0, 0.0, 0.0, 50.0),
            Tree::new(1, 100.0, 0.0, 50.0),
            Tree::new(2, 0.0, 120.0, 50.0),
        ];
        let mk = |ids: &[TreeId]| Waypoint {
            id: 0,
            center: Point::new(0.0, 0.0),
            covered: ids.iter().copied().collect(),
            feasible_radius: 0.0,
        };
        assert!((feasible_radius(&mk(&[0]), &trees, &p).unwrap() - 125.0).abs() < 1e-12);
        assert!((feasible_radius(&mk(&[0, 1]), &trees, &p).unwrap() - 25.0).abs() < 1e-12);
        assert!((feasible_radius(&mk(&[0, 2]), &trees, &p).unwrap() - 5.0).abs() < 1e-12);
        assert!(feasible_radius(&mk(&[]), &trees, &p).is_err());
        assert!(feasible_radius(&mk(&[9]), &trees, &p).is_err());
    }

    #[test]
    fn grid_contains_anchor_and_stays_in_disk() {
        let g = candidate_grid(Point::new(5.0, 5.0), 125.0, 10.0);
        assert!(g.contains(&Point::new(5.0, 5.0)));
        assert!(g.iter().all(|c| euclidean(*c, Point::new(5.0, 5.0)) <= 125.0 + COVER_TOL));
        // Grid points landing exactly on the boundary are kept.
        let g = candidate_grid(Point::new(0.0, 0.0), 120.0, 10.0);
        assert!(g.contains(&Point::new(120.0, 0.0)));
        assert!(g.contains(&Point::new(0.0, -120.0)));
    }
}

//! End-to-end planning: dense-region extraction, greedy coverage of the
//! sparse trees, tour solving over waypoints plus one macro-node per dense
//! region, sweep splicing, and optional replanning.
//!
//! Also holds synthetic scenario generation and the run configuration.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{covers, feasible_radius, greedy_cover, CoverageParams, Tree, TreeId, Waypoint};
use crate::density::{extract_dense_regions, ClusterParams, DenseRegion};
use crate::error::{Error, Result};
use crate::evaluation::{canonical_cost, closed_metrics, order_metrics, PathMetrics, QualityWeights};
use crate::geometry::{centroid, distance_to_polyline, euclidean, properly_cross, turning_angle_or_zero, Point};
use crate::replan::{replan_with_stats, ReplanParams, ReplanStats};
use crate::rng;
use crate::solver::aco::solve_aco_scored;
use crate::solver::mcrl::solve_mcrl_scored;
use crate::solver::{solve_ghi, AcoParams, GhiParams, McrlParams, SolverKind, TourScore};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub width: f64,
    pub height: f64,
}

impl Bounds {
    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

impl std::str::FromStr for Bounds {
    type Err = String;

    /// Parses `WIDTHxHEIGHT`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("bounds '{s}' must look like 3000x3000"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x > 0.0)
                .ok_or_else(|| format!("bounds '{s}' must have positive numeric sides"))
        };
        Ok(Bounds { width: parse(w)?, height: parse(h)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub trees: Vec<Tree>,
    pub bounds: Bounds,
    pub seed: Option<u64>,
}

impl Scenario {
    /// Bounds default to the bounding box of the tree crowns.
    pub fn from_trees(name: impl Into<String>, trees: Vec<Tree>) -> Self {
        let width = trees.iter().map(|t| t.center.x + t.radius).fold(0.0, f64::max);
        let height = trees.iter().map(|t| t.center.y + t.radius).fold(0.0, f64::max);
        Scenario { name: name.into(), trees, bounds: Bounds { width, height }, seed: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::EmptyInput("scenario has no trees"));
        }
        let mut ids = std::collections::HashSet::new();
        for t in &self.trees {
            if !ids.insert(t.id) {
                return Err(Error::invalid(format!("duplicate tree id {}", t.id)));
            }
            if !t.center.is_finite() || !(t.radius > 0.0 && t.radius.is_finite()) {
                return Err(Error::invalid(format!("tree {} has non-finite position or bad radius", t.id)));
            }
        }
        Ok(())
    }
}

/// Share of trees drawn from the Gaussian clumps when clusters are requested.
const CLUSTERED_FRACTION: f64 = 0.6;
const PLACEMENT_ATTEMPTS: usize = 20_000;

/// Seeded synthetic plantation: Gaussian clumps plus uniform scatter, with
/// every pair of centers at least `2 * crown_radius` apart.
pub fn generate_scenario(
    n_trees: usize,
    n_clusters: usize,
    bounds: Bounds,
    crown_radius: f64,
    seed: u64,
) -> Result<Scenario> {
    if n_trees == 0 {
        return Err(Error::EmptyInput("n_trees must be >= 1"));
    }
    if !(crown_radius > 0.0) {
        return Err(Error::invalid("crown radius must be > 0"));
    }
    let r = crown_radius;
    let spacing = 2.0 * r;
    let (w, h) = (bounds.width, bounds.height);
    if w < spacing || h < spacing {
        return Err(Error::Infeasible(format!("bounds {w}x{h} cannot hold a tree of radius {r}")));
    }
    // Non-overlapping disks of radius r inside the bounds grown by r, at
    // best hexagonal packing density.
    let hex_density = std::f64::consts::PI / (2.0 * 3f64.sqrt());
    let capacity = hex_density * (w + 2.0 * r) * (h + 2.0 * r) / (std::f64::consts::PI * r * r);
    if n_trees as f64 > capacity {
        return Err(Error::Infeasible(format!(
            "{n_trees} trees at spacing {spacing} do not fit in {w}x{h}"
        )));
    }

    let mut rng = rng::seeded(seed);
    let (lo_x, hi_x, lo_y, hi_y) = (r, w - r, r, h - r);
    let uniform = |rng: &mut rng::Rng| {
        Point::new(
            if hi_x > lo_x { rng.random_range(lo_x..=hi_x) } else { w / 2.0 },
            if hi_y > lo_y { rng.random_range(lo_y..=hi_y) } else { h / 2.0 },
        )
    };

    let sigma = 2.5 * r;
    let mut centers: Vec<Point> = Vec::with_capacity(n_clusters);
    for _ in 0..n_clusters {
        let mut c = uniform(&mut rng);
        for _ in 0..200 {
            if centers.iter().all(|o| euclidean(*o, c) >= 8.0 * sigma) {
                break;
            }
            c = uniform(&mut rng);
        }
        centers.push(c);
    }
    let clustered = if n_clusters == 0 {
        0
    } else {
        (n_trees as f64 * CLUSTERED_FRACTION).round() as usize
    };
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");

    let mut placed: Vec<Point> = Vec::with_capacity(n_trees);
    let fits = |p: Point, placed: &[Point]| {
        p.x >= lo_x && p.x <= hi_x.max(lo_x) && p.y >= lo_y && p.y <= hi_y.max(lo_y)
            && placed.iter().all(|q| euclidean(*q, p) >= spacing)
    };
    for k in 0..n_trees {
        let mut spot = None;
        if k < clustered {
            let c = centers[k % n_clusters];
            for _ in 0..PLACEMENT_ATTEMPTS / 10 {
                let p = Point::new(c.x + normal.sample(&mut rng), c.y + normal.sample(&mut rng));
                if fits(p, &placed) {
                    spot = Some(p);
                    break;
                }
            }
        }
        if spot.is_none() {
            for _ in 0..PLACEMENT_ATTEMPTS {
                let p = uniform(&mut rng);
                if fits(p, &placed) {
                    spot = Some(p);
                    break;
                }
            }
        }
        match spot {
            Some(p) => placed.push(p),
            None => {
                return Err(Error::Infeasible(format!(
                    "could only place {k} of {n_trees} trees at spacing {spacing} in {w}x{h}"
                )))
            }
        }
    }

    let trees = placed
        .into_iter()
        .enumerate()
        .map(|(i, p)| Tree { id: i as TreeId, center: p, radius: r })
        .collect();
    Ok(Scenario {
        name: format!("synthetic-n{n_trees}-c{n_clusters}-s{seed}"),
        trees,
        bounds,
        seed: Some(seed),
    })
}

/// Which objectives are active. Each stage adds to the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ObjectiveStage {
    Distance = 1,
    DistanceAngle = 2,
    DistanceAngleIntersection = 3,
    ObjectOptimized = 4,
}

impl ObjectiveStage {
    pub const ALL: [ObjectiveStage; 4] = [
        ObjectiveStage::Distance,
        ObjectiveStage::DistanceAngle,
        ObjectiveStage::DistanceAngleIntersection,
        ObjectiveStage::ObjectOptimized,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn uses_angle(self) -> bool {
        self >= ObjectiveStage::DistanceAngle
    }

    pub fn uses_intersections(self) -> bool {
        self >= ObjectiveStage::DistanceAngleIntersection
    }

    pub fn replans(self) -> bool {
        self == ObjectiveStage::ObjectOptimized
    }

    pub fn label(self) -> &'static str {
        match self {
            ObjectiveStage::Distance => "distance",
            ObjectiveStage::DistanceAngle => "distance+angle",
            ObjectiveStage::DistanceAngleIntersection => "distance+angle+intersection",
            ObjectiveStage::ObjectOptimized => "object-optimized",
        }
    }
}

impl TryFrom<u8> for ObjectiveStage {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(ObjectiveStage::Distance),
            2 => Ok(ObjectiveStage::DistanceAngle),
            3 => Ok(ObjectiveStage::DistanceAngleIntersection),
            4 => Ok(ObjectiveStage::ObjectOptimized),
            _ => Err(format!("stage must be 1..4, got {v}")),
        }
    }
}

impl From<ObjectiveStage> for u8 {
    fn from(s: ObjectiveStage) -> u8 {
        s as u8
    }
}

impl std::fmt::Display for ObjectiveStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    /// Master seed; every stochastic phase derives its own stream from it.
    pub seed: u64,
    pub solver: SolverKind,
    pub stage: ObjectiveStage,
    /// KDE bandwidth in px.
    pub kde_bandwidth: f64,
    pub coverage: CoverageParams,
    pub cluster: ClusterParams,
    pub quality: QualityWeights,
    pub ghi: GhiParams,
    pub aco: AcoParams,
    pub mcrl: McrlParams,
    pub replan: ReplanParams,
}

impl Default for PlanConfig {
    fn default() -> Self {
        let coverage = CoverageParams::default();
        PlanConfig {
            seed: 0,
            solver: SolverKind::Mcrl,
            stage: ObjectiveStage::ObjectOptimized,
            kde_bandwidth: 80.0,
            cluster: ClusterParams { sweep_width: 2.0 * coverage.reach(), ..ClusterParams::default() },
            coverage,
            quality: QualityWeights::default(),
            ghi: GhiParams::default(),
            aco: AcoParams::default(),
            mcrl: McrlParams::default(),
            replan: ReplanParams::default(),
        }
    }
}

fn scoped(section: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::InvalidParams(m) => Error::InvalidParams(format!("{section}: {m}")),
        other => other,
    })
}

impl PlanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kde_bandwidth > 0.0 && self.kde_bandwidth.is_finite()) {
            return Err(Error::invalid("kde_bandwidth must be > 0"));
        }
        scoped("coverage", self.coverage.validate())?;
        scoped("cluster", self.cluster.validate())?;
        scoped("quality", self.quality.validate())?;
        scoped("ghi", self.ghi.validate())?;
        scoped("aco", self.aco.validate())?;
        scoped("mcrl", self.mcrl.validate())?;
        scoped("replan", self.replan.validate())
    }

    /// Selection weights with the objectives of later stages switched off.
    pub fn stage_quality(&self) -> QualityWeights {
        let mut q = self.quality;
        if !self.stage.uses_angle() {
            q.beta = 0.0;
        }
        if !self.stage.uses_intersections() {
            q.omega = 0.0;
        }
        q
    }

    pub fn seeds(&self) -> Seeds {
        Seeds {
            master: self.seed,
            coverage: rng::derive(self.seed, 1),
            solver: rng::derive(self.seed, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub coverage: u64,
    pub solver: u64,
}

/// A dense region as a single tour node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroNode {
    pub region: usize,
    pub entry: Point,
    pub exit: Point,
    pub internal_length: f64,
    pub representative: Point,
}

impl MacroNode {
    pub fn from_region(region: &DenseRegion) -> Self {
        MacroNode {
            region: region.id,
            entry: region.entry,
            exit: region.exit,
            internal_length: region.sweep_length(),
            representative: centroid(&region.sweep),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanNode {
    Waypoint { waypoint: usize, position: Point },
    Region { region: usize, position: Point },
}

impl PlanNode {
    pub fn position(&self) -> Point {
        match self {
            PlanNode::Waypoint { position, .. } | PlanNode::Region { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Waypoint,
    SweepVertex,
}

impl VertexKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VertexKind::Waypoint => "waypoint",
            VertexKind::SweepVertex => "sweep_vertex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolylineVertex {
    pub point: Point,
    pub kind: VertexKind,
    /// Index into `PlanResult::nodes`.
    pub node: usize,
}

/// Metrics of the node-to-node tour and of the full flown polyline.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageMetrics {
    pub tour: PathMetrics,
    pub full: PathMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub density_s: f64,
    pub coverage_s: f64,
    pub solve_s: f64,
    pub assemble_s: f64,
    pub replan_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub scenario: String,
    pub solver: SolverKind,
    pub stage: ObjectiveStage,
    pub seeds: Seeds,
    pub waypoints: Vec<Waypoint>,
    pub regions: Vec<DenseRegion>,
    pub nodes: Vec<PlanNode>,
    pub node_order: Vec<usize>,
    pub polyline: Vec<PolylineVertex>,
    pub metrics: StageMetrics,
    /// Metrics before replanning, present for the object-optimized stage.
    pub pre_replan: Option<StageMetrics>,
    pub replan_stats: Option<ReplanStats>,
    #[serde(skip)]
    pub timings: PhaseTimings,
}

impl PlanResult {
    pub fn polyline_points(&self) -> Vec<Point> {
        self.polyline.iter().map(|v| v.point).collect()
    }

    pub fn node_positions(&self) -> Vec<Point> {
        self.node_order.iter().map(|&i| self.nodes[i].position()).collect()
    }

    pub fn macro_nodes(&self) -> Vec<MacroNode> {
        self.regions.iter().map(MacroNode::from_region).collect()
    }
}

/// Run `solver` over bare node positions, picking the best sampled tour by
/// canonical cost under the stage weights.
pub fn solve_nodes(nodes: &[Point], config: &PlanConfig, seed: u64) -> Result<Vec<usize>> {
    let quality = config.stage_quality();
    let score = |tour: &[usize]| canonical_cost(&order_metrics(nodes, tour), &quality);
    solve_nodes_scored(nodes, config, seed, &score)
}

/// As [`solve_nodes`] with a caller-chosen selection score. GHI builds a
/// single tour and ignores it.
pub fn solve_nodes_scored(nodes: &[Point], config: &PlanConfig, seed: u64, score: &TourScore<'_>) -> Result<Vec<usize>> {
    let stage = config.stage;
    match config.solver {
        SolverKind::Ghi => {
            let mut p = config.ghi;
            p.seed = seed;
            if !stage.uses_angle() {
                p.beta = 0.0;
            }
            if !stage.uses_intersections() {
                p.omega = 0.0;
            }
            solve_ghi(nodes, &p)
        }
        SolverKind::Aco => {
            let mut p = config.aco;
            p.seed = seed;
            if !stage.uses_angle() {
                p.beta = 0.0;
            }
            if !stage.uses_intersections() {
                p.omega = 0.0;
            }
            solve_aco_scored(nodes, &p, score).map(|(t, _)| t)
        }
        SolverKind::Mcrl => {
            let mut p = config.mcrl;
            p.seed = seed;
            if !stage.uses_angle() {
                p.beta = 0.0;
            }
            if !stage.uses_intersections() {
                p.omega = 0.0;
            }
            solve_mcrl_scored(nodes, &p, score, false).map(|(t, _, _)| t)
        }
    }
}

/// Splice each region's sweep into the node tour.
///
/// Walks the tour starting at the first waypoint node (or the first node if
/// there are none). Each sweep is flown in whichever of its
/// [`DenseRegion::sweep_variants`] has the lowest local cost under `weights`:
/// length of the two joining edges plus the sweep itself, turning at the
/// previous vertex, along the sweep and at its exit, and crossings of the
/// joining edges with the sweep. Ties keep the earlier variant.
pub fn assemble_polyline(
    nodes: &[PlanNode],
    order: &[usize],
    regions: &[DenseRegion],
    weights: &QualityWeights,
) -> Vec<PolylineVertex> {
    let m = order.len();
    if m == 0 {
        return Vec::new();
    }
    let start = order
        .iter()
        .position(|&i| matches!(nodes[i], PlanNode::Waypoint { .. }))
        .unwrap_or(0);
    let rotated: Vec<usize> = (0..m).map(|k| order[(start + k) % m]).collect();

    let mut out: Vec<PolylineVertex> = Vec::new();
    for (k, &node_idx) in rotated.iter().enumerate() {
        match nodes[node_idx] {
            PlanNode::Waypoint { position, .. } => out.push(PolylineVertex {
                point: position,
                kind: VertexKind::Waypoint,
                node: node_idx,
            }),
            PlanNode::Region { region, .. } => {
                let prev2 = out.len().checked_sub(2).map(|i| out[i].point);
                let prev = out.last().map(|v| v.point).or_else(|| (m > 1).then(|| nodes[rotated[m - 1]].position()));
                let next = if k + 1 < m {
                    Some(nodes[rotated[k + 1]].position())
                } else {
                    out.first().map(|v| v.point)
                };
                let mut best: Option<(f64, Vec<Point>)> = None;
                for variant in regions[region].sweep_variants() {
                    let cost = splice_cost(prev2, prev, &variant, next, weights);
                    if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                        best = Some((cost, variant));
                    }
                }
                let pts = best.map(|(_, v)| v).unwrap_or_default();
                out.extend(pts.into_iter().map(|p| PolylineVertex {
                    point: p,
                    kind: VertexKind::SweepVertex,
                    node: node_idx,
                }));
            }
        }
    }
    out
}

/// Local canonical cost of flying `sweep` between `prev` and `next`.
fn splice_cost(prev2: Option<Point>, prev: Option<Point>, sweep: &[Point], next: Option<Point>, w: &QualityWeights) -> f64 {
    let mut chain: Vec<Point> = Vec::with_capacity(sweep.len() + 3);
    chain.extend(prev2);
    chain.extend(prev);
    let first = chain.len();
    chain.extend_from_slice(sweep);
    let last = chain.len() - 1;
    chain.extend(next);

    let length: f64 = chain[first.saturating_sub(1)..].windows(2).map(|p| euclidean(p[0], p[1])).sum();
    let angle: f64 = (1..chain.len() - 1)
        .filter(|&i| i + 1 >= first && i <= last)
        .map(|i| turning_angle_or_zero(chain[i - 1], chain[i], chain[i + 1]))
        .sum();
    let mut crossings = 0usize;
    if w.omega != 0.0 {
        let joins = [(prev, sweep.first().copied()), (sweep.last().copied(), next)];
        for (a, b) in joins.into_iter().filter_map(|(a, b)| Some((a?, b?))) {
            crossings += sweep.windows(2).filter(|s| properly_cross(a, b, s[0], s[1])).count();
        }
    }
    w.alpha * length + w.beta * angle + w.omega * crossings as f64
}

/// Run the whole planning flow on one scenario.
pub fn plan(scenario: &Scenario, config: &PlanConfig) -> Result<PlanResult> {
    scenario.validate()?;
    config.validate()?;
    let seeds = config.seeds();
    let mut timings = PhaseTimings::default();
    let trees = &scenario.trees;

    let t0 = Instant::now();
    let (regions, low_idx) = extract_dense_regions(trees, config.kde_bandwidth, &config.cluster)?;
    timings.density_s = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let low: Vec<Tree> = low_idx.iter().map(|&i| trees[i]).collect();
    let waypoints = if low.is_empty() {
        Vec::new()
    } else {
        greedy_cover(&low, &config.coverage, seeds.coverage)?
    };
    timings.coverage_s = t0.elapsed().as_secs_f64();

    let mut nodes: Vec<PlanNode> = waypoints
        .iter()
        .enumerate()
        .map(|(k, w)| PlanNode::Waypoint { waypoint: k, position: w.center })
        .collect();
    nodes.extend(regions.iter().map(|r| PlanNode::Region {
        region: r.id,
        position: MacroNode::from_region(r).representative,
    }));
    if nodes.is_empty() {
        return Err(Error::EmptyInput("no tour nodes"));
    }

    let t0 = Instant::now();
    let positions: Vec<Point> = nodes.iter().map(PlanNode::position).collect();
    // Tours are judged on the path actually flown, sweeps included.
    let quality = config.stage_quality();
    let score = |order: &[usize]| {
        let pts: Vec<Point> = assemble_polyline(&nodes, order, &regions, &quality).iter().map(|v| v.point).collect();
        canonical_cost(&closed_metrics(&pts), &quality)
    };
    let node_order = solve_nodes_scored(&positions, config, seeds.solver, &score)?;
    timings.solve_s = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let polyline = assemble_polyline(&nodes, &node_order, &regions, &quality);
    let metrics = stage_metrics(&nodes, &node_order, &polyline);
    timings.assemble_s = t0.elapsed().as_secs_f64();

    let mut result = PlanResult {
        scenario: scenario.name.clone(),
        solver: config.solver,
        stage: config.stage,
        seeds,
        waypoints,
        regions,
        nodes,
        node_order,
        polyline,
        metrics,
        pre_replan: None,
        replan_stats: None,
        timings,
    };

    if config.stage.replans() {
        let t0 = Instant::now();
        apply_replan(&mut result, trees, config)?;
        result.timings.replan_s = t0.elapsed().as_secs_f64();
    }
    Ok(result)
}

fn stage_metrics(nodes: &[PlanNode], order: &[usize], polyline: &[PolylineVertex]) -> StageMetrics {
    let tour: Vec<Point> = order.iter().map(|&i| nodes[i].position()).collect();
    let full: Vec<Point> = polyline.iter().map(|v| v.point).collect();
    StageMetrics { tour: closed_metrics(&tour), full: closed_metrics(&full) }
}

/// Replan on the full polyline: waypoints move within their feasible disks,
/// sweep vertices stay pinned.
fn apply_replan(result: &mut PlanResult, trees: &[Tree], config: &PlanConfig) -> Result<()> {
    let chain: Vec<Waypoint> = result
        .polyline
        .iter()
        .enumerate()
        .map(|(k, v)| match (v.kind, result.nodes[v.node]) {
            (VertexKind::Waypoint, PlanNode::Waypoint { waypoint, .. }) => {
                let mut w = result.waypoints[waypoint].clone();
                w.feasible_radius = feasible_radius(&w, trees, &config.coverage)?;
                Ok(w)
            }
            _ => Ok(Waypoint::pinned(usize::MAX - k, v.point)),
        })
        .collect::<Result<_>>()?;
    let (moved, stats) = replan_with_stats(&chain, &config.quality, &config.replan)?;

    for (v, w) in result.polyline.iter_mut().zip(&moved) {
        v.point = w.center;
        if let PlanNode::Waypoint { waypoint, .. } = result.nodes[v.node] {
            result.waypoints[waypoint].center = w.center;
            result.waypoints[waypoint].feasible_radius = w.feasible_radius;
            result.nodes[v.node] = PlanNode::Waypoint { waypoint, position: w.center };
        }
    }
    result.pre_replan = Some(result.metrics);
    result.metrics = stage_metrics(&result.nodes, &result.node_order, &result.polyline);
    result.replan_stats = Some(stats);
    Ok(())
}

/// Trees the plan fails to observe.
///
/// A waypoint tree must sit inside its (possibly moved) waypoint's footprint;
/// a dense-region tree must lie within `w/2 + (R - r)` of its region's sweep.
pub fn coverage_violations(trees: &[Tree], result: &PlanResult, config: &PlanConfig) -> Vec<TreeId> {
    let mut owner_wp: HashMap<TreeId, usize> = HashMap::new();
    for (k, w) in result.waypoints.iter().enumerate() {
        for id in &w.covered {
            owner_wp.insert(*id, k);
        }
    }
    let mut owner_region: HashMap<TreeId, usize> = HashMap::new();
    for (k, r) in result.regions.iter().enumerate() {
        for id in &r.members {
            owner_region.insert(*id, k);
        }
    }
    // Sweeps as actually flown (possibly reversed) are the same point set.
    let mut flown: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
    for v in &result.polyline {
        if let PlanNode::Region { region, .. } = result.nodes[v.node] {
            flown.entry(region).or_default().push(v.point);
        }
    }

    let half = config.cluster.sweep_width / 2.0;
    trees
        .iter()
        .filter(|t| {
            if let Some(&k) = owner_wp.get(&t.id) {
                return !covers(result.waypoints[k].center, t, &config.coverage);
            }
            if let Some(&k) = owner_region.get(&t.id) {
                let sweep = flown.get(&k).map(Vec::as_slice).unwrap_or(&[]);
                let reach = half + config.coverage.fov_radius - t.radius;
                return !(distance_to_polyline(sweep, t.center) <= reach + 1e-9);
            }
            true
        })
        .map(|t| t.id)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: ObjectiveStage,
    pub metrics: StageMetrics,
    pub canonical_cost: f64,
}

/// Plan once per stage with identical seeds.
pub fn compare_stages(scenario: &Scenario, config: &PlanConfig, stages: &[ObjectiveStage]) -> Result<Vec<StageRow>> {
    if stages.is_empty() {
        return Err(Error::EmptyInput("no stages requested"));
    }
    stages
        .par_iter()
        .map(|&stage| {
            let cfg = PlanConfig { stage, ..config.clone() };
            let r = plan(scenario, &cfg)?;
            Ok(StageRow {
                stage,
                metrics: r.metrics,
                canonical_cost: canonical_cost(&r.metrics.full, &config.quality),
            })
        })
        .collect()
}

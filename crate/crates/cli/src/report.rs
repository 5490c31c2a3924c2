use cppdip_core::coverage::Waypoint;
use cppdip_core::density::DenseRegion;
use cppdip_core::evaluation::{canonical_cost, PathMetrics, QualityWeights};
use cppdip_core::pipeline::{
    MacroNode, ObjectiveStage, PhaseTimings, PlanConfig, PlanNode, PlanResult, PolylineVertex, Seeds, StageMetrics,
};
use cppdip_core::replan::ReplanStats;
use cppdip_core::solver::SolverKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportMetrics {
    /// Node-to-node tour, dense regions collapsed to their representative.
    pub tour: PathMetrics,
    /// Flown polyline including sweeps.
    pub full: PathMetrics,
    /// Canonical cost of the full polyline under the configured quality weights.
    pub canonical_cost: f64,
}

impl ReportMetrics {
    pub fn new(m: &StageMetrics, quality: &QualityWeights) -> Self {
        ReportMetrics { tour: m.tour, full: m.full, canonical_cost: canonical_cost(&m.full, quality) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub tree_count: usize,
    pub solver: SolverKind,
    pub stage: ObjectiveStage,
    pub seeds: Seeds,
    pub config: PlanConfig,
    pub metrics: ReportMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pre_replan: Option<ReportMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replan: Option<ReplanStats>,
    pub waypoints: Vec<Waypoint>,
    pub regions: Vec<DenseRegion>,
    pub macro_nodes: Vec<MacroNode>,
    pub nodes: Vec<PlanNode>,
    pub node_order: Vec<usize>,
    pub polyline: Vec<PolylineVertex>,
    /// Wall-clock seconds per phase; only present when requested since it
    /// breaks byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<PhaseTimings>,
}

impl RunReport {
    pub fn new(result: &PlanResult, config: &PlanConfig, tree_count: usize, with_timings: bool) -> Self {
        RunReport {
            scenario: result.scenario.clone(),
            tree_count,
            solver: result.solver,
            stage: result.stage,
            seeds: result.seeds,
            config: config.clone(),
            metrics: ReportMetrics::new(&result.metrics, &config.quality),
            pre_replan: result.pre_replan.map(|m| ReportMetrics::new(&m, &config.quality)),
            replan: result.replan_stats.clone(),
            waypoints: result.waypoints.clone(),
            regions: result.regions.clone(),
            macro_nodes: result.macro_nodes(),
            nodes: result.nodes.clone(),
            node_order: result.node_order.clone(),
            polyline: result.polyline.clone(),
            timings: with_timings.then_some(result.timings),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `order_index,x,y,kind` rows of the flown polyline.
pub fn polyline_csv(polyline: &[PolylineVertex]) -> String {
    #[derive(Serialize)]
    struct Row {
        order_index: usize,
        x: f64,
        y: f64,
        kind: &'static str,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for (k, v) in polyline.iter().enumerate() {
        w.serialize(Row { order_index: k, x: v.point.x, y: v.point.y, kind: v.kind.as_str() })
            .expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub solver: SolverKind,
    pub stage: ObjectiveStage,
    pub seed: u64,
    pub distance: f64,
    pub angle: f64,
    pub intersections: usize,
    pub canonical_cost: f64,
}

impl CompareRow {
    pub fn new(seed: u64, result: &PlanResult, quality: &QualityWeights) -> Self {
        let m = ReportMetrics::new(&result.metrics, quality);
        CompareRow {
            solver: result.solver,
            stage: result.stage,
            seed,
            distance: m.full.distance,
            angle: m.full.angle,
            intersections: m.full.intersections,
            canonical_cost: m.canonical_cost,
        }
    }
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

//! Tour solvers over a set of planar nodes. Each returns a visiting order
//! (indices into the node slice); the tour is implicitly closed.

pub mod aco;
pub mod ghi;
pub mod mcrl;

use serde::{Deserialize, Serialize};

use crate::geometry::{properly_cross, Point};

pub use aco::{solve_aco, AcoParams};
pub use ghi::{solve_ghi, GhiParams};
pub use mcrl::{solve_mcrl, McrlParams};

/// Cost of a candidate tour given as node indices; lower is better.
pub type TourScore<'a> = dyn Fn(&[usize]) -> f64 + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Ghi,
    Aco,
    Mcrl,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Ghi, SolverKind::Aco, SolverKind::Mcrl];

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Ghi => "ghi",
            SolverKind::Aco => "aco",
            SolverKind::Mcrl => "mcrl",
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ghi" => Ok(SolverKind::Ghi),
            "aco" => Ok(SolverKind::Aco),
            "mcrl" => Ok(SolverKind::Mcrl),
            other => Err(format!("unknown solver '{other}' (expected ghi, aco or mcrl)")),
        }
    }
}

/// Crossings that appending edge `path.last() -> next` would add against the
/// open path built so far. The edge ending at `path.last()` shares a vertex
/// with the new one and is skipped. With `closing` set, the first path edge
/// (which shares the start vertex) is skipped as well.
pub(crate) fn new_edge_crossings(nodes: &[Point], path: &[usize], next: usize, closing: bool) -> usize {
    let m = path.len();
    if m < 3 {
        return 0;
    }
    let a = nodes[path[m - 1]];
    let b = nodes[next];
    let first = usize::from(closing);
    (first..m - 2)
        .filter(|&k| properly_cross(a, b, nodes[path[k]], nodes[path[k + 1]]))
        .count()
}

/// Every node in `0..n` exactly once.
pub fn is_permutation(order: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n
        && order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

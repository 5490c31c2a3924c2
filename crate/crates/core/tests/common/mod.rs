//! Independent reference implementations used as oracles.
//!
//! Each one is written from first principles (parametric segment solve,
//! acos-based angles, plain double loops, exhaustive enumeration) and does
//! not call into the code it checks, apart from `Point` as a data carrier.
#![allow(dead_code)]

use cppdip_core::geometry::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent)))
        .collect()
}

/// Interior crossing by solving `a + t(b-a) = c + u(d-c)` for 0 < t, u < 1.
pub fn oracle_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (rx, ry) = (b.x - a.x, b.y - a.y);
    let (sx, sy) = (d.x - c.x, d.y - c.y);
    let denom = rx * sy - ry * sx;
    if denom.abs() < 1e-12 {
        return false;
    }
    let (qx, qy) = (c.x - a.x, c.y - a.y);
    let t = (qx * sy - qy * sx) / denom;
    let u = (qx * ry - qy * rx) / denom;
    let m = 1e-12;
    t > m && t < 1.0 - m && u > m && u < 1.0 - m
}

/// Every pair of closed-tour edges that share no vertex, checked directly.
pub fn oracle_closed_crossings(pts: &[Point]) -> usize {
    let n = pts.len();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if j <= i {
                continue;
            }
            let shares = j == i + 1 || (i == 0 && j == n - 1);
            if shares {
                continue;
            }
            if oracle_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                count += 1;
            }
        }
    }
    count
}

/// Turning angle in degrees from the acos of the normalised dot product.
pub fn oracle_turn(prev: Point, cur: Point, next: Point) -> f64 {
    let (ux, uy) = (cur.x - prev.x, cur.y - prev.y);
    let (vx, vy) = (next.x - cur.x, next.y - cur.y);
    let nu = (ux * ux + uy * uy).sqrt();
    let nv = (vx * vx + vy * vy).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0).acos().to_degrees()
}

/// (distance, cumulative angle) of a closed tour, summed edge by edge.
pub fn oracle_closed_metrics(pts: &[Point]) -> (f64, f64) {
    let n = pts.len();
    let mut d = 0.0;
    let mut a = 0.0;
    for k in 0..n {
        let p = pts[k];
        let q = pts[(k + 1) % n];
        d += ((q.x - p.x).powi(2) + (q.y - p.y).powi(2)).sqrt();
        a += oracle_turn(pts[(k + n - 1) % n], p, q);
    }
    (d, a)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Gaussian KDE at each input point: `(1/n) Σ_j exp(-r²/(2b²)) / (2π)`.
pub fn oracle_kde(pts: &[Point], b: f64) -> Vec<f64> {
    let n = pts.len() as f64;
    pts.iter()
        .map(|p| {
            let mut s = 0.0;
            for q in pts {
                let r2 = (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
                s += (-r2 / (2.0 * b * b)).exp() / std::f64::consts::TAU;
            }
            s / n
        })
        .collect()
}

/// Canonical cost of a closed tour with weights (alpha, beta, omega).
pub fn oracle_cost(pts: &[Point], w: (f64, f64, f64)) -> f64 {
    let (d, a) = oracle_closed_metrics(pts);
    w.0 * d + w.1 * a + w.2 * oracle_closed_crossings(pts) as f64
}

/// Minimum canonical cost over all closed tours, node 0 fixed and each
/// direction counted once ((n-1)!/2 tours).
pub fn oracle_optimum(nodes: &[Point], w: (f64, f64, f64)) -> f64 {
    let n = nodes.len();
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut rest, 0, &mut |perm| {
        if perm.len() >= 2 && perm[0] > perm[perm.len() - 1] {
            return;
        }
        let pts: Vec<Point> = std::iter::once(0).chain(perm.iter().copied()).map(|i| nodes[i]).collect();
        best = best.min(oracle_cost(&pts, w));
    });
    best
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// `Σ_k gamma^k r_{t+k}` evaluated forward for every t.
pub fn oracle_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    (0..rewards.len())
        .map(|t| {
            let mut g = 0.0;
            let mut w = 1.0;
            for r in &rewards[t..] {
                g += w * r;
                w *= gamma;
            }
            g
        })
        .collect()
}

/// One pheromone step on a dense matrix: evaporate, then add `q / L` once
/// per traversal of each undirected edge, then floor.
pub fn oracle_pheromone_step(tau: &mut [Vec<f64>], tours: &[(Vec<usize>, f64)], rho: f64, q: f64, floor: f64) {
    let n = tau.len();
    let mut add = vec![vec![0.0; n]; n];
    for (tour, len) in tours {
        if *len <= 0.0 || tour.len() < 2 {
            continue;
        }
        let m = tour.len();
        for k in 0..m {
            let (i, j) = (tour[k], tour[(k + 1) % m]);
            add[i][j] += q / len;
            if i != j {
                add[j][i] += q / len;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            tau[i][j] = (tau[i][j] * (1.0 - rho) + add[i][j]).max(floor);
        }
    }
}

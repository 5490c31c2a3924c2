//! Density-aware segmentation of the tree set.
//!
//! Trees whose kernel density exceeds the threshold are clustered with
//! DBSCAN; each cluster is wrapped in its convex hull and covered by a
//! boustrophedon (back-and-forth) sweep. Everything else, including dense
//! points DBSCAN leaves as noise, goes back to greedy disk coverage.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::coverage::{Tree, TreeId};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, euclidean, Point};

/// Relative band around the threshold inside which a density counts as
/// "equal" (keeps a uniform field from splitting on rounding noise).
const THRESHOLD_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub values: Vec<f64>,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdMode {
    Mean,
    /// Percentile in [0, 100], linearly interpolated between order statistics.
    Percentile { p: f64 },
}

/// Indices into the tree list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySplit {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseRegion {
    pub id: usize,
    pub members: BTreeSet<TreeId>,
    pub hull: Vec<Point>,
    pub sweep: Vec<Point>,
    /// Chords making up `sweep`; empty when the hull has no area.
    pub lines: Vec<(Point, Point)>,
    pub entry: Point,
    pub exit: Point,
}

impl DenseRegion {
    pub fn sweep_length(&self) -> f64 {
        self.sweep.windows(2).map(|w| euclidean(w[0], w[1])).sum()
    }

    /// Ways to fly the same chords: `sweep` forwards and backwards, then the
    /// mirrored zigzag forwards and backwards when there are two or more chords.
    pub fn sweep_variants(&self) -> Vec<Vec<Point>> {
        let mut out = vec![self.sweep.clone(), self.sweep.iter().rev().copied().collect()];
        if self.lines.len() >= 2 {
            let m = zigzag(&self.lines, true);
            out.push(m.iter().rev().copied().collect());
            out.insert(2, m);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    /// DBSCAN neighbourhood radius.
    pub epsilon: f64,
    pub min_pts: usize,
    /// Spacing between adjacent sweep lines.
    pub sweep_width: f64,
    pub threshold: ThresholdMode,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            epsilon: 150.0,
            min_pts: 3,
            sweep_width: 250.0,
            threshold: ThresholdMode::Mean,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("cluster epsilon must be > 0"));
        }
        if self.min_pts < 2 {
            return Err(Error::invalid("cluster min_pts must be >= 2"));
        }
        if !(self.sweep_width > 0.0 && self.sweep_width.is_finite()) {
            return Err(Error::invalid("sweep width must be > 0"));
        }
        if let ThresholdMode::Percentile { p } = self.threshold {
            if !(0.0..=100.0).contains(&p) {
                return Err(Error::invalid("density percentile must lie in [0, 100]"));
            }
        }
        Ok(())
    }
}

/// Isotropic 2-D Gaussian kernel at normalised distance `u`.
fn gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI)
}

/// Kernel density at every tree center, self-term included.
pub fn kde_at_points(trees: &[Tree], bandwidth: f64) -> Result<DensityField> {
    if trees.is_empty() {
        return Err(Error::EmptyInput("kde needs at least one tree"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::invalid("kde bandwidth must be > 0"));
    }
    let n = trees.len();
    let mut values = vec![0.0; n];
    // Symmetric kernel: fill both halves from one evaluation, then add the
    // self-terms last so every row sums in the same order.
    let mut sums = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let k = gaussian(euclidean(trees[i].center, trees[j].center) / bandwidth);
            sums[i] += k;
            sums[j] += k;
        }
    }
    let k0 = gaussian(0.0);
    for i in 0..n {
        values[i] = (sums[i] + k0) / n as f64;
    }
    Ok(DensityField { values, bandwidth })
}

fn percentile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Strictly-above-threshold trees are high density.
pub fn split_by_density(field: &DensityField, mode: ThresholdMode) -> Result<DensitySplit> {
    let v = &field.values;
    if v.is_empty() {
        return Err(Error::EmptyInput("density field is empty"));
    }
    let threshold = match mode {
        ThresholdMode::Mean => v.iter().sum::<f64>() / v.len() as f64,
        ThresholdMode::Percentile { p } => percentile(v, p),
    };
    let cut = threshold + threshold.abs() * THRESHOLD_REL_TOL;
    let (high, low) = (0..v.len()).partition(|&i| v[i] > cut);
    Ok(DensitySplit { high, low, threshold })
}

/// DBSCAN over `points`. Returns a cluster id per point, `None` for noise.
/// Neighbourhoods include the point itself; ids follow input order.
pub fn dbscan(points: &[Point], epsilon: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| euclidean(points[i], points[j]) <= epsilon)
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut next_id = 0;
    for seed in 0..n {
        if labels[seed].is_some() || !core[seed] {
            continue;
        }
        let id = next_id;
        next_id += 1;
        labels[seed] = Some(id);
        let mut queue: VecDeque<usize> = VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            if !core[p] {
                continue;
            }
            for &q in &neighbours[p] {
                if labels[q].is_none() {
                    labels[q] = Some(id);
                    queue.push_back(q);
                }
            }
        }
    }
    labels
}

/// Back-and-forth coverage of a convex polygon with lines `width` apart.
///
/// Lines run along the direction in which the polygon is thinnest across,
/// which minimises the number of lines (and so of U-turns). `ceil(E / w) + 1`
/// lines split the extent `E` into equal bands and run down the middle of
/// each, so spacing stays below `width` and the outer lines sit within half a
/// band of the extremes instead of on a bare edge or vertex. Points and
/// segments come back unchanged.
pub fn boustrophedon(hull: &[Point], width: f64) -> Vec<Point> {
    let lines = sweep_lines(hull, width);
    if lines.is_empty() {
        return hull.to_vec();
    }
    zigzag(&lines, false)
}

/// The chords flown by [`boustrophedon`], in stacking order. Empty for
/// polygons with no area.
pub fn sweep_lines(hull: &[Point], width: f64) -> Vec<(Point, Point)> {
    if hull.len() <= 2 {
        return Vec::new();
    }
    let (dir, normal) = sweep_frame(hull);
    let offs: Vec<f64> = hull.iter().map(|p| p.dot(&normal)).collect();
    let lo = offs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = offs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let extent = hi - lo;
    if extent <= 1e-9 {
        return Vec::new();
    }
    let lines = (extent / width).ceil() as usize + 1;
    let pitch = extent / lines as f64;
    (0..lines)
        .filter_map(|k| {
            let t = lo + pitch * (k as f64 + 0.5);
            let (s0, s1) = clip_line(hull, &offs, dir, t)?;
            let base = normal.scale(t);
            Some((base + dir.scale(s0), base + dir.scale(s1)))
        })
        .collect()
}

/// Chain chords back and forth. `mirrored` starts at the far end of the first
/// chord, which puts every turn on the opposite side.
pub fn zigzag(lines: &[(Point, Point)], mirrored: bool) -> Vec<Point> {
    let mut out = Vec::with_capacity(2 * lines.len());
    for (k, &(a, b)) in lines.iter().enumerate() {
        let (first, second) = if (k % 2 == 0) != mirrored { (a, b) } else { (b, a) };
        out.push(first);
        if euclidean(first, second) > 1e-9 {
            out.push(second);
        }
    }
    out
}

/// Unit direction of the sweep lines and the unit normal along which they are
/// stacked. The lines follow the hull edge that minimises the polygon's width
/// measured perpendicular to it; ties go to the first edge.
fn sweep_frame(hull: &[Point]) -> (Point, Point) {
    let n = hull.len();
    let mut best: Option<(f64, Point)> = None;
    for k in 0..n {
        let e = hull[(k + 1) % n] - hull[k];
        let len = e.norm();
        if len <= 1e-12 {
            continue;
        }
        let u = e.scale(1.0 / len);
        let width = hull
            .iter()
            .map(|p| u.cross(&(*p - hull[k])).abs())
            .fold(0.0, f64::max);
        if best.is_none_or(|(w, _)| width < w - 1e-9) {
            best = Some((width, u));
        }
    }
    let u = best.map(|(_, u)| u).unwrap_or(Point::new(1.0, 0.0));
    (u, Point::new(-u.y, u.x))
}

/// Extent of the chord `{p : p . normal = t}` of the convex polygon, as
/// coordinates along `dir`.
fn clip_line(hull: &[Point], offs: &[f64], dir: Point, t: f64) -> Option<(f64, f64)> {
    let n = hull.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut take = |p: Point| {
        let s = p.dot(&dir);
        lo = lo.min(s);
        hi = hi.max(s);
    };
    for k in 0..n {
        let (a, b) = (hull[k], hull[(k + 1) % n]);
        let (oa, ob) = (offs[k] - t, offs[(k + 1) % n] - t);
        if oa.abs() <= 1e-9 {
            take(a);
        }
        if oa * ob < 0.0 {
            let f = oa / (oa - ob);
            take(a + (b - a).scale(f));
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Full segmentation: KDE, density split, DBSCAN on the dense points, then a
/// hull and sweep per cluster. Returns the regions and the indices of the
/// trees left for greedy coverage.
pub fn extract_dense_regions(
    trees: &[Tree],
    bandwidth: f64,
    params: &ClusterParams,
) -> Result<(Vec<DenseRegion>, Vec<usize>)> {
    params.validate()?;
    let field = kde_at_points(trees, bandwidth)?;
    let split = split_by_density(&field, params.threshold)?;
    let high_pts: Vec<Point> = split.high.iter().map(|&i| trees[i].center).collect();
    let labels = dbscan(&high_pts, params.epsilon, params.min_pts);

    let n_clusters = labels.iter().flatten().map(|&c| c + 1).max().unwrap_or(0);
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    let mut low = split.low.clone();
    for (k, label) in labels.iter().enumerate() {
        match label {
            Some(c) => clusters[*c].push(split.high[k]),
            None => low.push(split.high[k]),
        }
    }

    let mut regions = Vec::new();
    for members in clusters {
        // A border point can be claimed by an earlier cluster, leaving a
        // later one short.
        if members.len() < params.min_pts {
            low.extend(members);
            continue;
        }
        let pts: Vec<Point> = members.iter().map(|&i| trees[i].center).collect();
        let hull = convex_hull(&pts);
        let lines = sweep_lines(&hull, params.sweep_width);
        let sweep = if lines.is_empty() { hull.clone() } else { zigzag(&lines, false) };
        regions.push(DenseRegion {
            id: regions.len(),
            members: members.iter().map(|&i| trees[i].id).collect(),
            entry: sweep[0],
            exit: sweep[sweep.len() - 1],
            hull,
            sweep,
            lines,
        });
    }
    low.sort_unstable();
    Ok((regions, low))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(id: u64, x: f64, y: f64) -> Tree {
        Tree::new(id, x, y, 50.0)
    }

    #[test]
    fn kde_single_and_coincident() {
        let one = kde_at_points(&[tree(0, 3.0, 4.0)], 80.0).unwrap();
        assert_eq!(one.values, vec![gaussian(0.0)]);
        // With the 1/n normalisation fixed, a coincident partner doubles a
        // point's density relative to an isolated one.
        let two = kde_at_points(&[tree(0, 3.0, 4.0), tree(1, 3.0, 4.0)], 80.0).unwrap();
        let apart = kde_at_points(&[tree(0, 3.0, 4.0), tree(1, 1e5, 4.0)], 80.0).unwrap();
        assert_eq!(two.values[0], two.values[1]);
        assert_eq!(two.values[0], 2.0 * apart.values[0]);
        assert!(kde_at_points(&[], 80.0).is_err());
        assert!(kde_at_points(&[tree(0, 0.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn uniform_field_has_no_high_points() {
        let f = DensityField { values: vec![0.3; 7], bandwidth: 1.0 };
        let s = split_by_density(&f, ThresholdMode::Mean).unwrap();
        assert!(s.high.is_empty());
        assert_eq!(s.low.len(), 7);
        let f = DensityField { values: vec![0.1], bandwidth: 1.0 };
        assert!(split_by_density(&f, ThresholdMode::Mean).unwrap().high.is_empty());
    }

    #[test]
    fn percentile_threshold() {
        let f = DensityField { values: vec![1.0, 2.0, 3.0, 4.0, 5.0], bandwidth: 1.0 };
        let s = split_by_density(&f, ThresholdMode::Percentile { p: 50.0 }).unwrap();
        assert_eq!(s.threshold, 3.0);
        assert_eq!(s.high, vec![3, 4]);
        let s = split_by_density(&f, ThresholdMode::Percentile { p: 90.0 }).unwrap();
        assert!((s.threshold - 4.6).abs() < 1e-12);
        assert_eq!(s.high, vec![4]);
    }

    #[test]
    fn dbscan_cases() {
        let eps = 10.0;
        let mut pts = Vec::new();
        for k in 0..10 {
            let a = k as f64 * 0.6;
            pts.push(Point::new(5.0 * a.cos(), 5.0 * a.sin()));
        }
        for k in 0..10 {
            let a = k as f64 * 0.6;
            pts.push(Point::new(100.0 + 5.0 * a.cos(), 5.0 * a.sin()));
        }
        let labels = dbscan(&pts, eps, 3);
        assert!(labels[..10].iter().all(|l| *l == Some(0)));
        assert!(labels[10..].iter().all(|l| *l == Some(1)));

        assert_eq!(dbscan(&[Point::new(0.0, 0.0)], eps, 3), vec![None]);

        let tight = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert_eq!(dbscan(&tight, eps, 3), vec![Some(0); 3]);
    }

    #[test]
    fn dbscan_border_point_joins_cluster() {
        // 0,1,2 are core; 3 is within eps of 2 only.
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(3.5, 0.0),
        ];
        let labels = dbscan(&pts, 1.6, 3);
        assert_eq!(labels, vec![Some(0); 4]);
    }

    #[test]
    fn sweep_square_and_rectangle() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(500.0, 0.0),
            Point::new(500.0, 500.0),
            Point::new(0.0, 500.0),
        ];
        let s = boustrophedon(&sq, 250.0);
        // three horizontal lines, two endpoints each, mid-band at E/6, E/2, 5E/6
        assert_eq!(s.len(), 6);
        let expected = [500.0 / 6.0, 250.0, 2500.0 / 6.0];
        for (k, p) in s.iter().enumerate() {
            assert!((p.y - expected[k / 2]).abs() < 1e-9);
        }
        assert!(expected[1] - expected[0] <= 250.0 && expected[0] <= 125.0);
        assert_eq!(s[0].x, 0.0);
        assert_eq!(s[1].x, 500.0);
        assert_eq!(s[2].x, 500.0);
        assert_eq!(s[3].x, 0.0);

        let rect = [
            Point::new(0.0, 0.0),
            Point::new(500.0, 0.0),
            Point::new(500.0, 100.0),
            Point::new(0.0, 100.0),
        ];
        let s = boustrophedon(&rect, 250.0);
        assert_eq!(s.len(), 4);
        for w in s.chunks(2) {
            assert!((w[0].y - w[1].y).abs() < 1e-9);
            assert!(((w[0].x - w[1].x).abs() - 500.0).abs() < 1e-9);
        }

        let pt = [Point::new(4.0, 4.0)];
        assert_eq!(boustrophedon(&pt, 250.0), pt.to_vec());
    }
}

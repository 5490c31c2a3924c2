//! Planar primitives: distances, turning angles, segment crossings and
//! convex hulls. Coordinates are image pixels (y grows downward), but nothing
//! here depends on handedness except the hull's winding, which is
//! counterclockwise in a y-up frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orientation tolerance in px². Signed areas within this band are collinear.
pub const ORIENT_EPS: f64 = 1e-9;

/// Squared length below which two points are treated as coincident.
const COINCIDENT_EPS2: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        euclidean(*self, *other)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(&self, other: &Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(&self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        euclidean(self.a, self.b)
    }

    /// Shortest distance from `p` to any point of the segment.
    pub fn distance_to(&self, p: Point) -> f64 {
        let ab = self.b - self.a;
        let len2 = ab.dot(&ab);
        if len2 <= COINCIDENT_EPS2 {
            return euclidean(p, self.a);
        }
        let t = ((p - self.a).dot(&ab) / len2).clamp(0.0, 1.0);
        euclidean(p, self.a + ab.scale(t))
    }
}

/// Symmetric pairwise Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_points(points: &[Point]) -> Self {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = euclidean(points[i], points[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn max(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Length of the closed tour visiting `order`.
    pub fn tour_length(&self, order: &[usize]) -> f64 {
        if order.len() < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for k in 0..order.len() {
            total += self.get(order[k], order[(k + 1) % order.len()]);
        }
        total
    }
}

pub fn euclidean(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Deviation from straight continuation at `cur`, in degrees within [0, 180].
pub fn turning_angle(prev: Point, cur: Point, next: Point) -> Result<f64> {
    let u = cur - prev;
    let v = next - cur;
    if u.dot(&u) <= COINCIDENT_EPS2 || v.dot(&v) <= COINCIDENT_EPS2 {
        return Err(Error::DegenerateAngle);
    }
    Ok(u.cross(&v).atan2(u.dot(&v)).abs().to_degrees())
}

/// Turning angle that scores coincident neighbours as a straight continuation.
///
/// Tours may legitimately revisit a position (duplicate tree coordinates, a
/// waypoint sitting on a sweep endpoint); there is no heading change to
/// charge in that case.
pub fn turning_angle_or_zero(prev: Point, cur: Point, next: Point) -> f64 {
    turning_angle(prev, cur, next).unwrap_or(0.0)
}

/// Sign of the signed area of (a, b, c): +1 left turn, -1 right turn, 0 collinear.
pub fn orientation(a: Point, b: Point, c: Point) -> i8 {
    let area = (b - a).cross(&(c - a));
    if area > ORIENT_EPS {
        1
    } else if area < -ORIENT_EPS {
        -1
    } else {
        0
    }
}

/// True iff the open interiors of the two segments cross at a single point.
/// Shared endpoints, T-junctions and collinear overlap are not crossings.
pub fn segments_properly_intersect(s1: &Segment, s2: &Segment) -> bool {
    let o1 = orientation(s1.a, s1.b, s2.a);
    let o2 = orientation(s1.a, s1.b, s2.b);
    let o3 = orientation(s2.a, s2.b, s1.a);
    let o4 = orientation(s2.a, s2.b, s1.b);
    o1 * o2 < 0 && o3 * o4 < 0
}

#[inline]
pub(crate) fn properly_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    segments_properly_intersect(&Segment::new(a, b), &Segment::new(c, d))
}

/// Intersection point of two segments that are known to cross properly.
pub fn crossing_point(s1: &Segment, s2: &Segment) -> Point {
    let r = s1.b - s1.a;
    let s = s2.b - s2.a;
    let t = (s2.a - s1.a).cross(&s) / r.cross(&s);
    s1.a + r.scale(t)
}

/// Number of edges in an open or closed tour over `n` vertices.
fn tour_edges(n: usize, closed: bool) -> usize {
    if n < 2 {
        0
    } else if closed {
        n
    } else {
        n - 1
    }
}

/// Whether tour edges `i < j` share a vertex in the tour sequence.
#[inline]
fn edges_adjacent(i: usize, j: usize, m: usize, closed: bool) -> bool {
    j == i + 1 || (closed && i == 0 && j + 1 == m)
}

/// Index pairs `(i, j)` of tour edges that properly cross. Edge `k` joins
/// vertex `k` and vertex `k + 1` (wrapping when closed).
pub fn tour_crossings(points: &[Point], closed: bool) -> Vec<(usize, usize)> {
    let n = points.len();
    let m = tour_edges(n, closed);
    // A closed 2-tour is one segment traversed twice.
    if closed && n < 3 {
        return Vec::new();
    }
    let edge = |k: usize| Segment::new(points[k], points[(k + 1) % n]);
    let mut out = Vec::new();
    for i in 0..m {
        let ei = edge(i);
        for j in (i + 2)..m {
            if edges_adjacent(i, j, m, closed) {
                continue;
            }
            if segments_properly_intersect(&ei, &edge(j)) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Number of properly crossing pairs of non-adjacent tour edges.
pub fn count_tour_intersections(points: &[Point], closed: bool) -> usize {
    tour_crossings(points, closed).len()
}

/// Counterclockwise convex hull without collinear vertices (monotone chain).
///
/// One or two distinct inputs, or an all-collinear set, yield the extreme
/// points only.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (*a - *b).dot(&(*a - *b)) <= COINCIDENT_EPS2);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && orientation(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orientation(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        // All collinear: the two chains collapse onto the extremes.
        return vec![pts[0], pts[pts.len() - 1]];
    }
    lower
}

/// Inside-or-on test for a counterclockwise convex polygon, with a distance
/// tolerance in pixels.
pub fn point_in_convex_polygon(poly: &[Point], p: Point, tol: f64) -> bool {
    match poly.len() {
        0 => false,
        1 => euclidean(poly[0], p) <= tol,
        2 => Segment::new(poly[0], poly[1]).distance_to(p) <= tol,
        n => (0..n).all(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            let e = b - a;
            // Signed distance of p to the left of edge a->b.
            e.cross(&(p - a)) / e.norm() >= -tol
        }),
    }
}

/// Shortest distance from `p` to an open polyline.
pub fn distance_to_polyline(poly: &[Point], p: Point) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => euclidean(poly[0], p),
        _ => poly
            .windows(2)
            .map(|w| Segment::new(w[0], w[1]).distance_to(p))
            .fold(f64::INFINITY, f64::min),
    }
}

pub fn centroid(points: &[Point]) -> Point {
    if points.is_empty() {
        return Point::default();
    }
    let n = points.len() as f64;
    let sum = points.iter().fold(Point::default(), |acc, p| acc + *p);
    sum.scale(1.0 / n)
}

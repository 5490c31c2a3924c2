//! Plan plots in image coordinates (y grows downward), one `<g>` per layer.

use std::fmt::Write as _;

use cppdip_core::coverage::Tree;
use cppdip_core::geometry::{crossing_point, tour_crossings, Point, Segment};
use cppdip_core::pipeline::{PlanResult, VertexKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layers {
    pub trees: bool,
    pub coverage: bool,
    pub hulls: bool,
    pub sweeps: bool,
    pub path: bool,
    pub waypoints: bool,
    pub crossings: bool,
}

impl Default for Layers {
    fn default() -> Self {
        Layers { trees: true, coverage: true, hulls: true, sweeps: true, path: true, waypoints: true, crossings: true }
    }
}

pub const LAYER_NAMES: [&str; 7] = ["trees", "coverage", "hulls", "sweeps", "path", "waypoints", "crossings"];

impl Layers {
    pub fn none() -> Self {
        Layers { trees: false, coverage: false, hulls: false, sweeps: false, path: false, waypoints: false, crossings: false }
    }

    /// Comma-separated layer names.
    pub fn parse(list: &str) -> Result<Self, String> {
        let mut l = Layers::none();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let slot = match name {
                "trees" => &mut l.trees,
                "coverage" => &mut l.coverage,
                "hulls" => &mut l.hulls,
                "sweeps" => &mut l.sweeps,
                "path" => &mut l.path,
                "waypoints" => &mut l.waypoints,
                "crossings" => &mut l.crossings,
                other => return Err(format!("unknown layer '{other}' (known: {})", LAYER_NAMES.join(","))),
            };
            *slot = true;
        }
        Ok(l)
    }
}

fn fmt(v: f64) -> String {
    // Two decimals are plenty for pixels and keep output stable.
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn points_attr(pts: &[Point]) -> String {
    pts.iter().map(|p| format!("{},{}", fmt(p.x), fmt(p.y))).collect::<Vec<_>>().join(" ")
}

fn extent(result: &PlanResult, trees: &[Tree], fov: f64) -> (f64, f64, f64, f64) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for t in trees {
        xs.extend([t.center.x - t.radius, t.center.x + t.radius]);
        ys.extend([t.center.y - t.radius, t.center.y + t.radius]);
    }
    for w in &result.waypoints {
        xs.extend([w.center.x - fov, w.center.x + fov]);
        ys.extend([w.center.y - fov, w.center.y + fov]);
    }
    for v in &result.polyline {
        xs.push(v.point.x);
        ys.push(v.point.y);
    }
    if xs.is_empty() {
        return (0.0, 0.0, 1.0, 1.0);
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 20.0;
    let (x0, y0) = (min(&xs) - pad, min(&ys) - pad);
    (x0, y0, (max(&xs) + pad - x0).max(1.0), (max(&ys) + pad - y0).max(1.0))
}

/// Render a plan. `fov_radius` sizes the coverage circles.
pub fn render_svg(result: &PlanResult, trees: &[Tree], fov_radius: f64, layers: &Layers) -> String {
    let (x0, y0, w, h) = extent(result, trees, fov_radius);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        fmt(x0),
        fmt(y0),
        fmt(w),
        fmt(h),
        fmt(w.min(1200.0)),
        fmt(h * w.min(1200.0) / w)
    );
    let _ = writeln!(s, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#, fmt(x0), fmt(y0), fmt(w), fmt(h));

    if layers.coverage {
        s.push_str("<g id=\"coverage\" fill=\"#4a90d9\" fill-opacity=\"0.08\" stroke=\"#4a90d9\" stroke-dasharray=\"6 4\">\n");
        for wp in &result.waypoints {
            let _ = writeln!(
                s,
                r#"<circle class="footprint" cx="{}" cy="{}" r="{}"/>"#,
                fmt(wp.center.x),
                fmt(wp.center.y),
                fmt(fov_radius)
            );
        }
        s.push_str("</g>\n");
    }
    if layers.hulls {
        s.push_str("<g id=\"hulls\" fill=\"#f5a623\" fill-opacity=\"0.15\" stroke=\"#f5a623\">\n");
        for r in &result.regions {
            let _ = writeln!(s, r#"<polygon class="hull" points="{}"/>"#, points_attr(&r.hull));
        }
        s.push_str("</g>\n");
    }
    if layers.trees {
        s.push_str("<g id=\"trees\" fill=\"#3c8d2f\" fill-opacity=\"0.6\" stroke=\"#1e5a17\">\n");
        for t in trees {
            let _ = writeln!(
                s,
                r#"<circle class="tree" cx="{}" cy="{}" r="{}"/>"#,
                fmt(t.center.x),
                fmt(t.center.y),
                fmt(t.radius)
            );
        }
        s.push_str("</g>\n");
    }
    if layers.sweeps {
        s.push_str("<g id=\"sweeps\" fill=\"none\" stroke=\"#d0021b\" stroke-width=\"3\">\n");
        for r in &result.regions {
            let _ = writeln!(s, r#"<polyline class="sweep" points="{}"/>"#, points_attr(&r.sweep));
        }
        s.push_str("</g>\n");
    }
    let pts = result.polyline_points();
    if layers.path && pts.len() >= 2 {
        let mut closed = pts.clone();
        closed.push(pts[0]);
        s.push_str("<g id=\"path\" fill=\"none\" stroke=\"#222\" stroke-width=\"2\">\n");
        let _ = writeln!(s, r#"<polyline class="tour" points="{}"/>"#, points_attr(&closed));
        s.push_str("</g>\n");
    }
    if layers.waypoints {
        s.push_str("<g id=\"waypoints\" fill=\"#222\">\n");
        for v in result.polyline.iter().filter(|v| v.kind == VertexKind::Waypoint) {
            let _ = writeln!(
                s,
                r#"<rect class="waypoint" x="{}" y="{}" width="12" height="12"/>"#,
                fmt(v.point.x - 6.0),
                fmt(v.point.y - 6.0)
            );
        }
        s.push_str("</g>\n");
    }
    if layers.crossings {
        let crossings = if pts.len() >= 3 { tour_crossings(&pts, true) } else { Vec::new() };
        let n = pts.len();
        s.push_str("<g id=\"crossings\" fill=\"none\" stroke=\"#bd10e0\" stroke-width=\"3\">\n");
        for (i, j) in &crossings {
            let p = crossing_point(
                &Segment::new(pts[*i], pts[(i + 1) % n]),
                &Segment::new(pts[*j], pts[(j + 1) % n]),
            );
            let _ = writeln!(s, r#"<circle class="crossing" cx="{}" cy="{}" r="14"/>"#, fmt(p.x), fmt(p.y));
        }
        let _ = writeln!(
            s,
            r##"<text class="crossing-count" x="{}" y="{}" font-size="28" fill="#bd10e0" stroke="none">intersections: {}</text>"##,
            fmt(x0 + 10.0),
            fmt(y0 + 34.0),
            crossings.len()
        );
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

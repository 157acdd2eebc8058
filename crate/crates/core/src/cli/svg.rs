//! Minimal native SVG rendering: shape outlines, particle snapshots and
//! energy-difference curves.

use std::fmt::Write as _;

use crate::geometry::{Point, Shape};
use crate::search::PairTrend;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

fn header(s: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn polygon(s: &mut String, pts: &[Point], map: impl Fn(f64, f64) -> (f64, f64), stroke: &str) {
    let coords: Vec<String> = pts
        .iter()
        .map(|p| {
            let (x, y) = map(p[0], p[1]);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#, coords.join(" "));
}

/// Overlaid outlines (in-plane section for three-dimensional shapes).
pub fn shape_outlines(shapes: &[(String, &Shape)]) -> String {
    let reach = shapes.iter().map(|(_, s)| s.max_extent()).fold(1.0, f64::max);
    let k = (SIZE / 2.0 - MARGIN) / reach;
    let map = |x: f64, y: f64| (SIZE / 2.0 + k * x, SIZE / 2.0 - k * y);
    let mut s = String::new();
    header(&mut s, SIZE, SIZE);
    for (i, (label, shape)) in shapes.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        polygon(&mut s, &shape.outline(360), map, color);
        let _ = writeln!(s, r#"<text x="10" y="{}" fill="{color}">{}</text>"#, 20 + 16 * i, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

/// Particles (unit-diameter circles) inside the container outline scaled by
/// `scale`.
pub fn snapshot(shape: &Shape, scale: f64, positions: &[Point]) -> String {
    let reach = scale * shape.max_extent() + 0.5;
    let k = (SIZE / 2.0 - MARGIN) / reach;
    let map = |x: f64, y: f64| (SIZE / 2.0 + k * x, SIZE / 2.0 - k * y);
    let mut s = String::new();
    header(&mut s, SIZE, SIZE);
    let outline: Vec<Point> = shape.outline(360).iter().map(|p| [p[0] * scale, p[1] * scale, 0.0]).collect();
    polygon(&mut s, &outline, map, "black");
    for p in positions {
        let (x, y) = map(p[0], p[1]);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="#1f77b4" fill-opacity="0.5"/>"##, 0.5 * k);
    }
    s.push_str("</svg>\n");
    s
}

/// `delta` against pressure with `± SE` bars, one series per pair.
pub fn delta_curves(series: &[(String, &PairTrend)]) -> String {
    let (w, h) = (640.0, 420.0);
    let mut s = String::new();
    header(&mut s, w, h);
    let points: Vec<(f64, f64, f64)> = series
        .iter()
        .flat_map(|(_, t)| t.pressures.iter().zip(&t.deltas).zip(&t.std_errors).map(|((p, d), e)| (*p, *d, *e)))
        .collect();
    if points.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let pmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let pmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let lo = points.iter().map(|p| p.1 - p.2).fold(0.0, f64::min);
    let hi = points.iter().map(|p| p.1 + p.2).fold(0.0, f64::max);
    let (pspan, vspan) = ((pmax - pmin).max(1e-12), (hi - lo).max(1e-12));
    let left = 70.0;
    let map = |p: f64, v: f64| (left + (w - left - MARGIN) * (p - pmin) / pspan, h - MARGIN - (h - 2.0 * MARGIN) * (v - lo) / vspan);
    let (x0, y0) = map(pmin, 0.0);
    let (x1, _) = map(pmax, 0.0);
    let _ = writeln!(s, r##"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y0:.3}" stroke="#888" stroke-dasharray="4 3"/>"##);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">pressure</text>"#, w / 2.0, h - 8.0);
    let _ = writeln!(s, r#"<text x="12" y="{:.1}" transform="rotate(-90 12 {:.1})" text-anchor="middle">delta total energy</text>"#, h / 2.0, h / 2.0);
    let _ = writeln!(s, r#"<text x="{left}" y="{:.1}">{lo:.4}</text>"#, h - MARGIN + 14.0);
    let _ = writeln!(s, r#"<text x="{left}" y="{:.1}">{hi:.4}</text>"#, MARGIN - 6.0);
    for (i, (label, t)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = t
            .pressures
            .iter()
            .zip(&t.deltas)
            .map(|(p, d)| {
                let (x, y) = map(*p, *d);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        for ((p, d), e) in t.pressures.iter().zip(&t.deltas).zip(&t.std_errors) {
            let (x, y) = map(*p, *d);
            let (_, ya) = map(*p, d - e);
            let (_, yb) = map(*p, d + e);
            let _ = writeln!(s, r#"<line x1="{x:.3}" y1="{ya:.3}" x2="{x:.3}" y2="{yb:.3}" stroke="{color}"/>"#);
            let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="{color}"/>"#);
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" fill="{color}">{}</text>"#, left + 10.0, 20 + 16 * i, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

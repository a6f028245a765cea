//! JSON and SVG output for tilings.

use std::fmt::Write;

use serde::Serialize;

use super::geometry::{ExcavationHexagon, Pt};
use super::{Color, Tiling};

const SCALE: f64 = 24.0;
const MARGIN: f64 = 12.0;

/// Planar position of a lattice point: the steps `(1,0)`, `(0,1)` and
/// `(1,-1)` become unit vectors at 0, 60 and -60 degrees. The SVG y axis
/// points down, so heights are negated.
fn planar(p: Pt) -> (f64, f64) {
    let (x, y) = (p.0 as f64, p.1 as f64);
    (x + 0.5 * y, -(3f64.sqrt() / 2.0) * y)
}

fn fill(c: Option<Color>) -> &'static str {
    match c {
        Some(Color::Blue) => "#3b6fd8",
        Some(Color::Red) => "#d8453b",
        Some(Color::Green) => "#3bab5a",
        None => "#999999",
    }
}

#[derive(Serialize)]
struct TilingDoc<'a> {
    n: i64,
    v: Pt,
    corners: [Pt; 6],
    tiling: &'a Tiling,
    color_counts: [usize; 3],
}

/// Tiling with its hexagon as a JSON document.
pub fn tiling_json(h: &ExcavationHexagon, t: &Tiling) -> serde_json::Value {
    let (b, r, g) = t.color_counts(h.n);
    let doc = TilingDoc {
        n: h.n,
        v: h.v,
        corners: [h.a(), h.b(), h.c(), h.d(), h.e(), h.f()],
        tiling: t,
        color_counts: [b, r, g],
    };
    serde_json::to_value(doc).expect("tiling serializes")
}

/// Tiling drawn in the triangular lattice: blue, red and green lozenges,
/// grey border triangles, the equator as a dashed line.
pub fn tiling_svg(h: &ExcavationHexagon, t: &Tiling) -> String {
    let corners = [h.a(), h.b(), h.c(), h.d(), h.e(), h.f()].map(planar);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (x, y) in corners {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let tx = |p: (f64, f64)| ((p.0 - x0) * SCALE + MARGIN, (p.1 - y0) * SCALE + MARGIN);
    let poly = |pts: &[Pt]| {
        pts.iter()
            .map(|&p| {
                let (x, y) = tx(planar(p));
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let width = (x1 - x0) * SCALE + 2.0 * MARGIN;
    let height = (y1 - y0) * SCALE + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    for l in &t.lozenges {
        let c = l.side(h.n).map(|side| l.color(side));
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{}" stroke="black" stroke-width="0.8"/>"#,
            poly(&l.vertices()),
            fill(c)
        );
    }
    for b in &t.border {
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{}" stroke="black" stroke-width="0.8"/>"#,
            poly(&b.vertices(h.n)),
            fill(None)
        );
    }
    let (ax, ay) = tx(planar(h.a()));
    let (dx, dy) = tx(planar(h.d()));
    let _ = writeln!(
        s,
        r#"<line x1="{ax:.3}" y1="{ay:.3}" x2="{dx:.3}" y2="{dy:.3}" stroke="black" stroke-dasharray="4 3"/>"#
    );
    s.push_str("</svg>\n");
    s
}

/// Heatmap of a grid of values (`NaN` cells left blank), one square per cell.
pub fn heatmap_svg(grid: &[Vec<f64>], title: &str) -> String {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in grid.iter().flatten().filter(|v| v.is_finite()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let rows = grid.len();
    let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
    let cell = (400.0 / rows.max(cols).max(1) as f64).max(1.0);
    let (w, h) = (cols as f64 * cell + 2.0 * MARGIN, rows as f64 * cell + 2.0 * MARGIN + 16.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}">"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="14" font-size="12">{}</text>"#, escape(title));
    let span = if hi > lo { hi - lo } else { 1.0 };
    for (r, row) in grid.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let q = (v - lo) / span;
            let (red, blue) = ((255.0 * q) as u8, (255.0 * (1.0 - q)) as u8);
            // row 0 at the bottom
            let y = MARGIN + 16.0 + (rows - 1 - r) as f64 * cell;
            let x = MARGIN + c as f64 * cell;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="rgb({red},64,{blue})"/>"#
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lozenge::standard_tiling;

    #[test]
    fn svg_has_one_polygon_per_piece() {
        let h = ExcavationHexagon::new((2, 3), 5).unwrap();
        let t = standard_tiling(&h);
        let svg = tiling_svg(&h, &t);
        assert_eq!(svg.matches("<polygon").count(), t.lozenges.len() + t.border.len());
        let doc = tiling_json(&h, &t);
        assert_eq!(doc["n"], 5);
    }
}

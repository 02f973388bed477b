use std::fmt::Write;
use std::path::Path;

use singauss::singular::{PointKind, SignClass, Stratum};
use singauss::theorems::{Analysis, Scenario};
use singauss::Vec2;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;
const SHADE_CELLS: usize = 96;
const ARROWS_PER_LOOP: usize = 6;

struct View {
    u0: f64,
    v1: f64,
    scale: f64,
}

impl View {
    fn new(s: &Scenario) -> Self {
        let (mut u0, mut u1, v0, v1) = s.domain.bounds();
        if let Some(p) = s.domain.period() {
            u0 = 0.0;
            u1 = p;
        }
        let scale = (SIZE - 2.0 * MARGIN) / (u1 - u0).max(v1 - v0);
        View { u0, v1, scale }
    }

    fn at(&self, p: Vec2) -> (f64, f64) {
        (MARGIN + (p.x - self.u0) * self.scale, MARGIN + (self.v1 - p.y) * self.scale)
    }

    fn path(&self, pts: impl IntoIterator<Item = Vec2>) -> String {
        let mut d = String::new();
        for (i, p) in pts.into_iter().enumerate() {
            let (x, y) = self.at(p);
            let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
        }
        d
    }
}

/// SVG picture of the domain: `M±` shading, `Σ`, classified points with
/// their sector angles, and boundary orientation arrows.
pub fn render(s: &Scenario, a: &Analysis) -> String {
    let view = View::new(s);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, "<title>{}</title>", s.name);

    let (mut u0, mut u1, v0, v1) = s.domain.bounds();
    if let Some(p) = s.domain.period() {
        u0 = 0.0;
        u1 = p;
    }
    let n = SHADE_CELLS;
    let (du, dv) = ((u1 - u0) / n as f64, (v1 - v0) / n as f64);
    let _ = writeln!(out, r#"<g id="shading" stroke="none">"#);
    for i in 0..n {
        for j in 0..n {
            let c = Vec2::new(u0 + (i as f64 + 0.5) * du, v0 + (j as f64 + 0.5) * dv);
            if !s.domain.contains(c) {
                continue;
            }
            let Ok(l) = s.map.lambda_unchecked(c) else { continue };
            let fill = if l >= 0.0 { "#d6e6f5" } else { "#f5d9d6" };
            let (x, y) = view.at(Vec2::new(c.x - 0.5 * du, c.y + 0.5 * dv));
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                du * view.scale + 0.3,
                dv * view.scale + 0.3
            );
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g id="boundary" fill="none" stroke="#333" stroke-width="1.5">"##);
    for lp in s.domain.loops() {
        let _ = writeln!(out, r#"<path d="{}"/>"#, view.path(lp.polyline().iter().map(|&(_, p)| p)));
        let (t0, t1) = lp.range();
        for k in 0..ARROWS_PER_LOOP {
            let t = t0 + (t1 - t0) * (k as f64 + 0.25) / ARROWS_PER_LOOP as f64;
            let (Ok(p), Ok(v)) = (lp.point(t), lp.velocity(t)) else { continue };
            let (x, y) = view.at(p);
            let dir = Vec2::new(v.x, -v.y).normalized() * 7.0;
            let side = dir.perp() * 0.5;
            let _ = writeln!(
                out,
                r##"<path class="arrow" d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z" fill="#333"/>"##,
                x + dir.x,
                y + dir.y,
                x - side.x,
                y - side.y,
                x + side.x,
                y + side.y
            );
        }
    }
    let _ = writeln!(out, "</g>");

    if !a.set.components.is_empty() {
        let _ = writeln!(out, r##"<g id="sigma" fill="none" stroke="#b03020" stroke-width="2">"##);
        for c in &a.set.components {
            let mut pts: Vec<Vec2> = c.samples.iter().map(|x| x.point).collect();
            if c.topology == singauss::singular::Topology::Closed {
                if let Some(&first) = pts.first() {
                    pts.push(first + c.shift);
                }
            }
            let _ = writeln!(out, r#"<path class="sigma-curve" d="{}"/>"#, view.path(pts));
        }
        let _ = writeln!(out, "</g>");
    }

    if !a.points.is_empty() {
        let _ = writeln!(out, r#"<g id="points">"#);
        for p in &a.points {
            let (x, y) = view.at(p.location);
            let class = match (p.stratum, p.kind, p.sign) {
                (Stratum::Boundary, _, SignClass::Null) => "null",
                (Stratum::Boundary, _, _) => "boundary",
                (Stratum::Interior, PointKind::Second { .. }, _) => "second-kind",
                (Stratum::Interior, PointKind::First, _) => "first-kind",
            };
            let fill = match p.sign {
                SignClass::Positive => "#1f5fa8",
                SignClass::Negative => "#a8321f",
                SignClass::Null => "#ffffff",
            };
            let _ = writeln!(
                out,
                r##"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="5" fill="{fill}" stroke="#000"/>"##
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">α+={:.3}π α-={:.3}π</text>"#,
                x + 8.0,
                y - 8.0,
                p.alpha_plus / std::f64::consts::PI,
                p.alpha_minus / std::f64::consts::PI
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

pub fn write(s: &Scenario, a: &Analysis, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render(s, a))
}

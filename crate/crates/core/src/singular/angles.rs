//! Sector angles `α±` at a distinguished point of `Σ`.
//!
//! On a small circle around `p` the arcs lying in `cl M±` (and in `M` for
//! boundary points) are swept by the image of the outward radial vector.
//! Each arc contributes the turn from the image of the edge it starts on to
//! the swept vector, the parallel-transport-corrected sweep itself, and the
//! turn back onto the image of the edge it ends on. Angles are measured in
//! the target's fixed orthonormal frame.

use serde::Serialize;

use super::trace::{bracket_root, golden_min};
use crate::error::Result;
use crate::geom::{wrap_angle, Vec2};
use crate::mapcore::{PlanarDomain, SurfaceMap};
use std::f64::consts::{PI, TAU};

const CIRCLE_SAMPLES: usize = 720;
const MAX_TURN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadiusSample {
    pub radius: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// Points where the circle meets `Σ` (inside `M` for boundary points).
    pub sigma_hits: usize,
    /// Points where the circle meets `∂M`.
    pub boundary_hits: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleEstimate {
    /// Richardson-extrapolated values.
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub per_radius: Vec<RadiusSample>,
}

impl AngleEstimate {
    pub fn side(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.alpha_plus,
            Side::Minus => self.alpha_minus,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Edge {
    Sigma,
    Boundary { loop_index: usize, t: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    theta: f64,
    edge: Edge,
}

struct Circle<'a> {
    map: &'a SurfaceMap,
    dom: &'a PlanarDomain,
    center: Vec2,
    radius: f64,
}

impl Circle<'_> {
    fn at(&self, theta: f64) -> Vec2 {
        self.center + Vec2::from_angle(theta) * self.radius
    }

    /// Image of the outward radial vector and the image velocity of the circle.
    fn radial_image(&self, theta: f64) -> Result<(Vec2, Vec2, Vec2)> {
        let q = self.at(theta);
        let j = self.map.jacobian(q)?;
        let w = Vec2::from_angle(theta);
        Ok((self.map.eval(q)?, j.apply(w), j.apply(w.perp() * self.radius)))
    }

    fn frame_angle(&self, at: Vec2, v: Vec2) -> Result<f64> {
        Ok(self.map.target().jet(at)?.frame_angle(v))
    }

    /// `μ(c')` for the image curve.
    fn connection(&self, theta: f64) -> Result<f64> {
        if self.map.target().is_flat() {
            return Ok(0.0);
        }
        let (y, _, vel) = self.radial_image(theta)?;
        Ok(self.map.target().jet(y)?.connection_form(vel))
    }

    /// Direction of the edge through the event point, oriented away from the center.
    fn edge_dir(&self, ev: &Event) -> Result<Vec2> {
        let q = self.at(ev.theta);
        let out = q - self.center;
        let dir = match ev.edge {
            Edge::Sigma => super::trace::tangent(self.map, q)?.0,
            Edge::Boundary { loop_index, t } => self.dom.loops()[loop_index].velocity(t)?,
        };
        Ok(if dir.dot(out) >= 0.0 { dir } else { -dir })
    }

    /// Image turn at the event point from direction `a` to direction `b`.
    ///
    /// On `Σ` the Jacobian has rank one and the two images may be
    /// antiparallel, so the sense of the turn is taken from the limit on
    /// the arc side: `sgn λ` times the sense of the small turn from `a` to `b`.
    fn edge_turn(&self, theta: f64, a: Vec2, b: Vec2, side: Side) -> Result<f64> {
        let q = self.at(theta);
        let j = self.map.jacobian(q)?;
        let (y, _, _) = self.radial_image(theta)?;
        let turn = wrap_angle(self.frame_angle(y, j.apply(b))? - self.frame_angle(y, j.apply(a))?);
        let orientation = match side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        };
        let sense = a.cross(b) * orientation;
        Ok(if sense == 0.0 { turn } else { sense.signum() * turn.abs() })
    }

    /// Continuous rotation of the radial image over `[a, b]` relative to parallel transport.
    fn sweep(&self, a: f64, b: f64) -> Result<f64> {
        let (qa, ya, _) = self.radial_image(a)?;
        let (qb, yb, _) = self.radial_image(b)?;
        let pa = self.frame_angle(qa, ya)?;
        let pb = self.frame_angle(qb, yb)?;
        self.sweep_rec(a, b, pa, pb, 0)
    }

    fn sweep_rec(&self, a: f64, b: f64, pa: f64, pb: f64, depth: usize) -> Result<f64> {
        let turn = wrap_angle(pb - pa);
        if turn.abs() < MAX_TURN && (depth >= 3 || b - a < 0.05) || depth > 40 {
            let transport = if self.map.target().is_flat() {
                0.0
            } else {
                let m = 0.5 * (a + b);
                (b - a) / 6.0 * (self.connection(a)? + 4.0 * self.connection(m)? + self.connection(b)?)
            };
            return Ok(turn + transport);
        }
        let m = 0.5 * (a + b);
        let (qm, ym, _) = self.radial_image(m)?;
        let pm = self.frame_angle(qm, ym)?;
        Ok(self.sweep_rec(a, m, pa, pm, depth + 1)? + self.sweep_rec(m, b, pm, pb, depth + 1)?)
    }

    fn events(&self, restrict: bool) -> Result<Vec<Event>> {
        let mut events = Vec::new();
        let lam = |th: f64| self.map.lambda_unchecked(self.at(th));
        // The last sample reuses the first so the wrap point has one sign.
        let values: Vec<Option<f64>> = (0..CIRCLE_SAMPLES).map(|i| lam(TAU * i as f64 / CIRCLE_SAMPLES as f64).ok()).collect();
        for i in 0..CIRCLE_SAMPLES {
            let (Some(a), Some(b)) = (values[i], values[(i + 1) % CIRCLE_SAMPLES]) else {
                continue;
            };
            if (a < 0.0) != (b < 0.0) {
                let (ta, tb) = (TAU * i as f64 / CIRCLE_SAMPLES as f64, TAU * (i + 1) as f64 / CIRCLE_SAMPLES as f64);
                let r = if i + 1 == CIRCLE_SAMPLES {
                    bracket_root(|th| if th >= TAU { Ok(b) } else { lam(th) }, ta, tb, 1e-14)?
                } else {
                    bracket_root(lam, ta, tb, 1e-14)?
                };
                events.push(Event { theta: r.rem_euclid(TAU), edge: Edge::Sigma });
            }
        }
        if restrict {
            for (li, lp) in self.dom.loops().iter().enumerate() {
                let g = |t: f64| -> Result<f64> {
                    let d = self.dom.delta(self.center, lp.point(t)?);
                    Ok(d.dot(d) - self.radius * self.radius)
                };
                let poly = lp.polyline();
                let mut roots = Vec::new();
                for w in poly.windows(2) {
                    let (ta, tb) = (w[0].0, w[1].0);
                    let (ga, gb) = (g(ta)?, g(tb)?);
                    if ga * gb < 0.0 || ga == 0.0 {
                        roots.push(bracket_root(g, ta, tb, 1e-15)?);
                        continue;
                    }
                    if ga < 0.0 {
                        continue;
                    }
                    // Both ends outside: the circle may still cut the segment twice.
                    let (da, db) = (self.dom.delta(self.center, w[0].1), self.dom.delta(self.center, w[1].1));
                    let chord = db - da;
                    let len = chord.norm();
                    let s = (-da.dot(chord) / (len * len)).clamp(0.0, 1.0);
                    if (da + chord * s).norm() > self.radius + len {
                        continue;
                    }
                    let (tm, gm) = golden_min(g, ta, tb, 80)?;
                    if gm < 0.0 {
                        roots.push(bracket_root(g, ta, tm, 1e-15)?);
                        roots.push(bracket_root(g, tm, tb, 1e-15)?);
                    }
                }
                for t in roots {
                    let d = self.dom.delta(self.center, lp.point(t)?);
                    events.push(Event { theta: d.angle().rem_euclid(TAU), edge: Edge::Boundary { loop_index: li, t } });
                }
            }
        }
        events.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        events.dedup_by(|a, b| (a.theta - b.theta).abs() < 1e-12);
        Ok(events)
    }

    /// `(α+, α-)` at this radius.
    fn angles(&self, restrict: bool) -> Result<RadiusSample> {
        let events = self.events(restrict)?;
        let mut sample = RadiusSample { radius: self.radius, alpha_plus: 0.0, alpha_minus: 0.0, sigma_hits: 0, boundary_hits: 0 };
        for e in &events {
            match e.edge {
                Edge::Sigma if !restrict || self.dom.contains(self.at(e.theta)) => sample.sigma_hits += 1,
                Edge::Sigma => {}
                Edge::Boundary { .. } => sample.boundary_hits += 1,
            }
        }
        let side_at = |th: f64| -> Result<Option<Side>> {
            let q = self.at(th);
            if restrict && !self.dom.contains(q) {
                return Ok(None);
            }
            let l = self.map.lambda_unchecked(q)?;
            Ok(Some(if l > 0.0 { Side::Plus } else { Side::Minus }))
        };
        let (mut plus, mut minus) = (0.0, 0.0);
        let mut add = |side: Side, rot: f64| match side {
            Side::Plus => plus += rot,
            Side::Minus => minus -= rot,
        };
        if events.is_empty() {
            if let Some(side) = side_at(0.0)? {
                add(side, self.sweep(0.0, TAU)?);
            }
            return Ok(RadiusSample { alpha_plus: plus, alpha_minus: minus, ..sample });
        }
        for i in 0..events.len() {
            let start = events[i];
            let mut end = events[(i + 1) % events.len()];
            if i + 1 == events.len() {
                end.theta += TAU;
            }
            let Some(side) = side_at(0.5 * (start.theta + end.theta))? else {
                continue;
            };
            let (da, db) = (self.edge_dir(&start)?, self.edge_dir(&Event { theta: end.theta.rem_euclid(TAU), ..end })?);
            let enter = self.edge_turn(start.theta, da, Vec2::from_angle(start.theta), side)?;
            let leave = self.edge_turn(end.theta, Vec2::from_angle(end.theta), db, side)?;
            add(side, enter + self.sweep(start.theta, end.theta)? + leave);
        }
        Ok(RadiusSample { alpha_plus: plus, alpha_minus: minus, ..sample })
    }
}

/// `(α+, α-)` on one circle of radius `r` around `p`.
pub fn angles_at_radius(map: &SurfaceMap, dom: &PlanarDomain, p: Vec2, r: f64, boundary: bool) -> Result<(f64, f64)> {
    let s = Circle { map, dom, center: p, radius: r }.angles(boundary)?;
    Ok((s.alpha_plus, s.alpha_minus))
}

/// Radii `r0, r0/2, ...` used by [`sector_angles`].
pub const RADII: usize = 4;

/// Richardson extrapolation to `r -> 0` of values at halving radii,
/// removing error terms up to order `r^(n-1)`.
fn extrapolate(values: &[f64]) -> f64 {
    let mut row = values.to_vec();
    for k in 1..values.len() {
        let w = f64::from(1u32 << k);
        row = row.windows(2).map(|p| (w * p[1] - p[0]) / (w - 1.0)).collect();
    }
    row[0]
}

/// Largest number of radius reductions tried by [`sector_angles`].
const SHRINKS: usize = 10;
/// Accepted gap between extrapolations of successive orders.
const CONSISTENCY: f64 = 1e-2;

/// Where a distinguished point sits, as far as its sector angles are concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Site {
    Interior,
    /// On `∂M`; `null` when the null direction is tangent to `∂M`.
    Boundary { null: bool },
}

fn estimate(map: &SurfaceMap, dom: &PlanarDomain, p: Vec2, r0: f64, site: Site) -> Result<(AngleEstimate, bool)> {
    let boundary = site != Site::Interior;
    let mut per_radius = Vec::with_capacity(RADII);
    for k in 0..RADII {
        let r = r0 / f64::from(1u32 << k);
        per_radius.push(Circle { map, dom, center: p, radius: r }.angles(boundary)?);
    }
    let plus: Vec<f64> = per_radius.iter().map(|s| s.alpha_plus).collect();
    let minus: Vec<f64> = per_radius.iter().map(|s| s.alpha_minus).collect();
    let (ap, am) = (extrapolate(&plus), extrapolate(&minus));
    let local = per_radius.iter().all(|s| {
        if boundary {
            s.sigma_hits == 1 && s.boundary_hits == 2
        } else {
            s.sigma_hits == 2 && s.boundary_hits == 0
        }
    });
    let consistent = (ap - extrapolate(&plus[..RADII - 1])).abs() < CONSISTENCY
        && (am - extrapolate(&minus[..RADII - 1])).abs() < CONSISTENCY;
    // Where the null direction is transverse to ∂M the two sectors fill a half-disk.
    let closed = site != (Site::Boundary { null: false }) || (ap + am - PI).abs() < CONSISTENCY;
    Ok((AngleEstimate { alpha_plus: ap, alpha_minus: am, per_radius }, local && consistent && closed))
}

/// Sector-angle estimates over [`RADII`] halving radii, extrapolated to
/// `r -> 0`. The starting radius `r0` is reduced until every circle meets
/// `Σ` and `∂M` as a single fold branch through `p` would, and the
/// extrapolations of successive orders agree. At non-null boundary points the
/// two sectors must also add up to `π`.
pub fn sector_angles(map: &SurfaceMap, dom: &PlanarDomain, p: Vec2, r0: f64, site: Site) -> Result<AngleEstimate> {
    let mut r = r0;
    let mut last = None;
    for _ in 0..SHRINKS {
        let (est, ok) = estimate(map, dom, p, r, site)?;
        if ok {
            return Ok(est);
        }
        last = Some(est);
        r *= 0.25;
    }
    Ok(last.expect("at least one attempt"))
}

/// Nearest multiple of `π` and the distance to it.
pub fn lattice(value: f64) -> (f64, f64) {
    let k = (value / PI).round();
    (k * PI, (value - k * PI).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::MetricChart;

    fn flat(x: &str, y: &str) -> SurfaceMap {
        SurfaceMap::from_strings(x, y, MetricChart::flat()).unwrap()
    }

    #[test]
    fn identity_full_turn() {
        let (a, b) = angles_at_radius(&flat("u", "v"), &PlanarDomain::unit_disk(), Vec2::new(0.2, 0.1), 0.1, false).unwrap();
        assert!((a - TAU).abs() < 1e-12 && b == 0.0);
    }

    #[test]
    fn fold_first_kind_point_splits_evenly() {
        let e = sector_angles(&flat("u", "v^2"), &PlanarDomain::unit_disk(), Vec2::new(0.3, 0.0), 0.1, Site::Interior).unwrap();
        assert!((e.alpha_plus - PI).abs() < 1e-9, "{}", e.alpha_plus);
        assert!((e.alpha_minus - PI).abs() < 1e-9, "{}", e.alpha_minus);
    }

    #[test]
    fn linear_shear_gives_pulled_back_angle() {
        // A shear maps the upper half-disk to a half-plane sector: the radial sweep
        // recovers π on each side while a tangent sweep would not.
        let e = sector_angles(&flat("u + 2*v", "v"), &PlanarDomain::unit_disk(), Vec2::ZERO, 0.1, Site::Interior).unwrap();
        assert!((e.alpha_plus - TAU).abs() < 1e-9);
        let b = sector_angles(&flat("u + 2*v", "v"), &PlanarDomain::unit_disk(), Vec2::new(1.0, 0.0), 0.1, Site::Boundary { null: false }).unwrap();
        assert!((b.alpha_plus - PI).abs() < 1e-3, "{}", b.alpha_plus);
    }

    #[test]
    fn cusp_angles_sum_to_full_turn() {
        let e = sector_angles(&flat("u^3 - 3*u*v", "v"), &PlanarDomain::unit_disk(), Vec2::ZERO, 0.1, Site::Interior).unwrap();
        assert!((e.alpha_plus + e.alpha_minus - TAU).abs() < 0.1 * PI);
        let (d, _) = lattice(e.alpha_plus - e.alpha_minus);
        assert!([TAU, 0.0, -TAU].iter().any(|x| (x - d).abs() < 1e-12));
    }

    #[test]
    fn fold_null_boundary_point() {
        let e = sector_angles(&flat("u", "v^2"), &PlanarDomain::unit_disk(), Vec2::new(1.0, 0.0), 0.1, Site::Boundary { null: true }).unwrap();
        assert!((e.alpha_plus - 2f64.atan()).abs() < 1e-3, "{:?}", e);
        // The fold maps both sectors onto the same image sector.
        assert!((e.alpha_minus - e.alpha_plus).abs() < 1e-6);
    }
}

use serde::Serialize;

use super::angles::{lattice, sector_angles, RadiusSample, Site};
use super::kind::{SecondKindPoint, KIND_TOL};
use super::trace::{tangent, SingularSet};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mapcore::{PlanarDomain, SurfaceMap};
use std::f64::consts::PI;

/// Snap tolerance for the `π` lattice.
pub const SNAP_TOL: f64 = 0.05 * PI;
/// `|det(η, T_∂M)|` below this makes a boundary point null.
pub const DIRECTION_TOL: f64 = 1e-6;
/// Smallest accepted `|det(γ', T_∂M)|` at `Σ ∩ ∂M`.
pub const TRANSVERSALITY_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stratum {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointKind {
    First,
    Second { order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignClass {
    Positive,
    Null,
    Negative,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularPointRecord {
    pub location: Vec2,
    pub stratum: Stratum,
    pub kind: PointKind,
    pub sign: SignClass,
    /// Values entering the identities: lattice-snapped except at null boundary points.
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// Extrapolated values before snapping.
    pub raw_alpha_plus: f64,
    pub raw_alpha_minus: f64,
    pub per_radius: Vec<RadiusSample>,
    /// Largest distance of a snapped value from its lattice point; `0` when not snapped.
    pub lattice_distance: f64,
    pub radius: f64,
    pub crossing: Option<usize>,
    pub component: Option<usize>,
    /// Sign of `λ` on the inward null ray (boundary points only).
    pub null_ray_sign: Option<i8>,
}

/// Reject tangential or near-tangential meetings of `Σ` with `∂M`; with
/// `require_empty`, reject any meeting at all.
pub fn transversality_check(set: &SingularSet, require_empty: bool) -> Result<()> {
    let bad: Vec<(f64, f64)> = set
        .crossings
        .iter()
        .filter(|c| c.tangential || c.transversality.abs() < TRANSVERSALITY_FLOOR)
        .map(|c| (c.point.x, c.point.y))
        .collect();
    if !bad.is_empty() {
        return Err(Error::TransversalityViolation { points: bad });
    }
    if require_empty && !set.crossings.is_empty() {
        return Err(Error::SingularMeetsBoundary { count: set.crossings.len() });
    }
    Ok(())
}

fn snap(value: f64, u: f64, v: f64) -> Result<(f64, f64)> {
    let (k, d) = lattice(value);
    if d > SNAP_TOL {
        return Err(Error::NonLattice { value, u, v });
    }
    Ok((k, d))
}

/// Starting radius: at most `0.1`, and at most half the distance to any other
/// distinguished point (and to `∂M` for interior points).
fn start_radius(dom: &PlanarDomain, p: Vec2, others: &[Vec2], interior: bool) -> f64 {
    let mut r: f64 = 0.1;
    for &o in others {
        let d = dom.delta(p, o).norm();
        if d > 1e-12 {
            r = r.min(0.5 * d);
        }
    }
    if interior {
        r = r.min(0.5 * dom.distance_to_boundary(p));
    }
    r
}

/// Interior sign class from `α+ - α-` on the lattice `{2π, 0, -2π}`.
pub fn classify_interior(diff: f64) -> Option<SignClass> {
    let k = (diff / (2.0 * PI)).round();
    if (diff - 2.0 * PI * k).abs() > 1e-9 {
        return None;
    }
    match k as i64 {
        1 => Some(SignClass::Positive),
        0 => Some(SignClass::Null),
        -1 => Some(SignClass::Negative),
        _ => None,
    }
}

/// Classify all interior second-kind points and all points of `Σ ∩ ∂M`.
pub fn classify_points(
    map: &SurfaceMap,
    dom: &PlanarDomain,
    set: &SingularSet,
    second_kind: &[SecondKindPoint],
) -> Result<Vec<SingularPointRecord>> {
    let mut locations: Vec<Vec2> = second_kind.iter().map(|s| s.point).collect();
    locations.extend(set.crossings.iter().map(|c| c.point));
    let mut out = Vec::new();
    for s in second_kind {
        let p = s.point;
        let r0 = start_radius(dom, p, &locations, true);
        let est = sector_angles(map, dom, p, r0, Site::Interior)?;
        let (ap, dp) = snap(est.alpha_plus, p.x, p.y)?;
        let (am, dm) = snap(est.alpha_minus, p.x, p.y)?;
        let sign = classify_interior(ap - am).ok_or(Error::NonLattice { value: ap - am, u: p.x, v: p.y })?;
        out.push(SingularPointRecord {
            location: p,
            stratum: Stratum::Interior,
            kind: PointKind::Second { order: s.order },
            sign,
            alpha_plus: ap,
            alpha_minus: am,
            raw_alpha_plus: est.alpha_plus,
            raw_alpha_minus: est.alpha_minus,
            per_radius: est.per_radius,
            lattice_distance: dp.max(dm),
            radius: r0,
            crossing: None,
            component: Some(s.component),
            null_ray_sign: None,
        });
    }
    for (ci, c) in set.crossings.iter().enumerate() {
        let p = c.point;
        let lp = &dom.loops()[c.loop_index];
        let along = lp.velocity(c.t)?;
        let (t, _) = tangent(map, p)?;
        let eta = map.null_direction(p, Some(t))?;
        let kind = if t.cross(eta).abs() > KIND_TOL { PointKind::First } else { PointKind::Second { order: 0 } };
        let r0 = start_radius(dom, p, &locations, false);
        let null = eta.cross(along.normalized()).abs() < DIRECTION_TOL;
        let est = sector_angles(map, dom, p, r0, Site::Boundary { null })?;
        let component = set.components.iter().position(|k| k.start == Some(ci) || k.end == Some(ci));
        let mut rec = SingularPointRecord {
            location: p,
            stratum: Stratum::Boundary,
            kind,
            sign: SignClass::Null,
            alpha_plus: est.alpha_plus,
            alpha_minus: est.alpha_minus,
            raw_alpha_plus: est.alpha_plus,
            raw_alpha_minus: est.alpha_minus,
            per_radius: est.per_radius,
            lattice_distance: 0.0,
            radius: r0,
            crossing: Some(ci),
            component,
            null_ray_sign: None,
        };
        if !null {
            let inward = along.perp();
            let ray = if eta.dot(inward) > 0.0 { eta } else { -eta };
            let eps = 1e-3 * r0;
            let l = map.signed_area_density(p + ray * eps)?;
            let ray_sign: i8 = if l > 0.0 { 1 } else { -1 };
            let (ap, dp) = snap(est.alpha_plus, p.x, p.y)?;
            let (am, dm) = snap(est.alpha_minus, p.x, p.y)?;
            let diff = ((ap - am) / PI).round() as i64;
            let angle_sign: i8 = match diff {
                1 => 1,
                -1 => -1,
                _ => 0,
            };
            if angle_sign != ray_sign {
                let name = |s: i8| if s > 0 { "positive" } else if s < 0 { "negative" } else { "null" };
                return Err(Error::EstimatorDisagreement {
                    u: p.x,
                    v: p.y,
                    angle: format!("{} (α+ - α- = {:.6})", name(angle_sign), ap - am),
                    ray: name(ray_sign).to_string(),
                });
            }
            rec.sign = if ray_sign > 0 { SignClass::Positive } else { SignClass::Negative };
            rec.alpha_plus = ap;
            rec.alpha_minus = am;
            rec.lattice_distance = dp.max(dm);
            rec.null_ray_sign = Some(ray_sign);
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::kind::classify_kind;
    use super::super::trace::{trace_singular_set, TraceOptions};
    use super::*;
    use crate::mapcore::BoundaryLoop;
    use crate::surface::MetricChart;

    fn run(x: &str, y: &str, dom: &PlanarDomain) -> (SingularSet, Vec<SingularPointRecord>) {
        let map = SurfaceMap::from_strings(x, y, MetricChart::flat()).unwrap();
        let set = trace_singular_set(&map, dom, TraceOptions::default()).unwrap();
        let mut sk = Vec::new();
        for (i, c) in set.components.iter().enumerate() {
            sk.extend(classify_kind(&map, c, i, set.step).unwrap().second_kind);
        }
        let recs = classify_points(&map, dom, &set, &sk).unwrap();
        (set, recs)
    }

    #[test]
    fn fold_disk_boundary_points_are_null() {
        let (set, recs) = run("u", "v^2", &PlanarDomain::unit_disk());
        transversality_check(&set, false).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.sign == SignClass::Null));
    }

    #[test]
    fn cusp_disk_classes() {
        let (_, recs) = run("u^3 - 3*u*v", "v", &PlanarDomain::unit_disk());
        let interior: Vec<_> = recs.iter().filter(|r| r.stratum == Stratum::Interior).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].sign, SignClass::Positive);
        assert_eq!((interior[0].alpha_plus, interior[0].alpha_minus), (2.0 * PI, 0.0));
        let boundary: Vec<_> = recs.iter().filter(|r| r.stratum == Stratum::Boundary).collect();
        assert_eq!(boundary.len(), 2);
        for r in boundary {
            assert_eq!(r.sign, SignClass::Negative);
            assert!((r.alpha_plus + r.alpha_minus - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn tangential_boundary_violates_transversality() {
        let dom = PlanarDomain::disk(BoundaryLoop::circle(0.0, 1.0, 1.0, true), vec![]).unwrap();
        let map = SurfaceMap::from_strings("u", "v^2", MetricChart::flat()).unwrap();
        let set = trace_singular_set(&map, &dom, TraceOptions::default()).unwrap();
        assert!(matches!(transversality_check(&set, false), Err(Error::TransversalityViolation { .. })));
    }

    #[test]
    fn levine_precondition() {
        let (set, _) = run("u", "v^2", &PlanarDomain::unit_disk());
        assert!(matches!(transversality_check(&set, true), Err(Error::SingularMeetsBoundary { count: 2 })));
    }

    #[test]
    fn interior_lattice() {
        assert_eq!(classify_interior(2.0 * PI), Some(SignClass::Positive));
        assert_eq!(classify_interior(0.0), Some(SignClass::Null));
        assert_eq!(classify_interior(-2.0 * PI), Some(SignClass::Negative));
        assert_eq!(classify_interior(PI), None);
    }
}

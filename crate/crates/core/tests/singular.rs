use std::f64::consts::PI;

use proptest::prelude::*;
use singauss::singular::{project, singular_curvature, tangent, PointKind, SignClass, SingularPointRecord, Stratum, SNAP_TOL};
use singauss::theorems::{analyze, Analysis, Scenario};
use singauss::{BoundaryLoop, ErrorClass, MetricChart, PlanarDomain, SurfaceMap, Vec2};

fn trig(c: [f64; 4]) -> (String, String) {
    (
        format!("u + {}*sin(2*pi*v) + {}*sin(2*pi*(u + v))", c[0], c[1]),
        format!("v + {}*sin(2*pi*u) + {}*sin(2*pi*(u - v))", c[2], c[3]),
    )
}

fn flat(x: &str, y: &str) -> SurfaceMap {
    SurfaceMap::from_strings(x, y, MetricChart::flat()).unwrap()
}

/// Swap `u` and `v` in an expression over `u, v`.
fn swap_uv(text: &str) -> String {
    text.replace('u', "\u{0}").replace('v', "u").replace('\u{0}', "v")
}

/// A point of `Σ` near `(u, v)` where `κ_s` is defined.
fn first_kind_point(map: &SurfaceMap, u: f64, v: f64) -> Option<Vec2> {
    let q = project(map, Vec2::new(u, v)).ok()?;
    ((q - Vec2::new(u, v)).norm() < 0.5 && singular_curvature(map, q, Vec2::new(1.0, 0.0)).is_ok()).then_some(q)
}

fn kappa(map: &SurfaceMap, p: Vec2, dir: Vec2) -> f64 {
    singular_curvature(map, p, dir).unwrap().0
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn singular_curvature_ignores_the_direction_of_travel(c in prop::array::uniform4(-0.3f64..0.3), u in -0.5f64..0.5, v in -0.5f64..0.5) {
        let (x, y) = trig(c);
        let map = flat(&x, &y);
        let Some(p) = first_kind_point(&map, u, v) else { return Ok(()) };
        let (t, _) = tangent(&map, p).unwrap();
        prop_assert!(close(kappa(&map, p, t), kappa(&map, p, -t)));
    }

    /// Reflecting the source by `(u, v) -> (v, u)` reverses the orientation of `M`.
    #[test]
    fn singular_curvature_ignores_the_orientation_of_the_source(c in prop::array::uniform4(-0.3f64..0.3), u in -0.5f64..0.5, v in -0.5f64..0.5) {
        let (x, y) = trig(c);
        let map = flat(&x, &y);
        let Some(p) = first_kind_point(&map, u, v) else { return Ok(()) };
        let mirrored = flat(&swap_uv(&x), &swap_uv(&y));
        let q = Vec2::new(p.y, p.x);
        let (t, _) = tangent(&map, p).unwrap();
        let (s, _) = tangent(&mirrored, q).unwrap();
        prop_assert!(close(kappa(&map, p, t), kappa(&mirrored, q, s)));
    }

    /// Swapping the target coordinates reverses the orientation of `N`.
    #[test]
    fn singular_curvature_ignores_the_orientation_of_the_target(c in prop::array::uniform4(-0.3f64..0.3), u in -0.5f64..0.5, v in -0.5f64..0.5) {
        let (x, y) = trig(c);
        let map = flat(&x, &y);
        let Some(p) = first_kind_point(&map, u, v) else { return Ok(()) };
        let swapped = flat(&y, &x);
        let (t, _) = tangent(&map, p).unwrap();
        let (s, _) = tangent(&swapped, p).unwrap();
        prop_assert!(close(kappa(&map, p, t), kappa(&swapped, p, s)));
    }

    #[test]
    fn classified_points_of_random_maps_obey_the_lattice(c in prop::array::uniform4(-0.3f64..0.3)) {
        let (x, y) = trig(c);
        let s = Scenario::new("random", flat(&x, &y), PlanarDomain::unit_disk());
        match analyze(&s) {
            Ok(a) => check_lattice(&a),
            Err(f) => prop_assert_eq!(f.error.class(), ErrorClass::Hypothesis, "{}", f),
        }
    }
}

fn check_point(p: &SingularPointRecord) {
    let (ap, am) = (p.alpha_plus, p.alpha_minus);
    let at = format!("{:?} at ({}, {})", p.stratum, p.location.x, p.location.y);
    match (p.stratum, p.sign) {
        (Stratum::Interior, sign) => {
            assert!(matches!(p.kind, PointKind::Second { .. }), "{at}");
            assert!((ap + am - 2.0 * PI).abs() < 1e-12, "{at}: α+ + α- = {}", ap + am);
            let expected = match sign {
                SignClass::Positive => 2.0 * PI,
                SignClass::Null => 0.0,
                SignClass::Negative => -2.0 * PI,
            };
            assert!((ap - am - expected).abs() < 1e-12, "{at}: α+ - α- = {}", ap - am);
        }
        (Stratum::Boundary, SignClass::Null) => {
            assert!((ap - am).abs() < SNAP_TOL, "{at}: α+ - α- = {}", ap - am);
        }
        (Stratum::Boundary, sign) => {
            assert!((ap + am - PI).abs() < 1e-12, "{at}: α+ + α- = {}", ap + am);
            let expected = if sign == SignClass::Positive { PI } else { -PI };
            assert!((ap - am - expected).abs() < 1e-12, "{at}: α+ - α- = {}", ap - am);
        }
    }
    if p.sign != SignClass::Null || p.stratum == Stratum::Interior {
        assert!(p.lattice_distance <= SNAP_TOL, "{at}");
        assert!((p.raw_alpha_plus - ap).abs() <= SNAP_TOL && (p.raw_alpha_minus - am).abs() <= SNAP_TOL, "{at}");
    }
}

fn check_lattice(a: &Analysis) {
    for p in &a.points {
        check_point(p);
    }
}

fn analyzed(x: &str, y: &str, dom: PlanarDomain) -> Analysis {
    analyze(&Scenario::new("fixed", flat(x, y), dom)).unwrap()
}

#[test]
fn fold_boundary_points_are_null() {
    let a = analyzed("u", "v^2", PlanarDomain::unit_disk());
    assert_eq!(a.points.len(), 2);
    // Near (±1, 0) each half-disk maps onto {y ≥ 0, ±x ≤ 1 - y/2}, a sector of angle atan 2.
    for p in &a.points {
        assert_eq!(p.sign, SignClass::Null);
        assert!((p.alpha_plus - 2f64.atan()).abs() < 1e-6 && (p.alpha_minus - 2f64.atan()).abs() < 1e-6);
    }
    check_lattice(&a);
}

#[test]
fn cusp_is_found_at_the_origin() {
    let a = analyzed("u^3 - 3*u*v", "v", PlanarDomain::unit_disk());
    let interior: Vec<_> = a.points.iter().filter(|p| p.stratum == Stratum::Interior).collect();
    assert_eq!(interior.len(), 1);
    assert!(interior[0].location.norm() < 1e-6);
    let raw = interior[0].raw_alpha_plus + interior[0].raw_alpha_minus;
    assert!((raw - 2.0 * PI).abs() <= 0.1 * PI);
    check_lattice(&a);
}

#[test]
fn lips_on_an_annulus() {
    let outer = BoundaryLoop::circle(0.0, 0.0, 1.0, true);
    let inner = BoundaryLoop::circle(0.0, 0.0, 0.2, false);
    let dom = PlanarDomain::disk(outer, vec![inner]).unwrap();
    let a = analyzed("u", "v^3 + (u^2 - 0.25)*v", dom);
    check_lattice(&a);
}

#[test]
fn singular_curvature_of_lines_and_circles() {
    // Σ = {v = 0} maps onto the x-axis, so κ_s vanishes.
    let map = flat("u", "v^2");
    for u in [-0.7, 0.0, 0.4] {
        assert!(kappa(&map, Vec2::new(u, 0.0), Vec2::new(1.0, 0.0)).abs() < 1e-12);
    }
    // Σ = {r = 1} maps onto the unit circle.
    let bend = flat("u*(3 - u^2 - v^2)/2", "v*(3 - u^2 - v^2)/2");
    for th in [0.3f64, 1.7, 4.0] {
        let p = Vec2::from_angle(th);
        assert!((kappa(&bend, p, Vec2::from_angle(th).perp()).abs() - 1.0).abs() < 1e-9);
    }
}

use std::f64::consts::PI;

use proptest::prelude::*;
use singauss::quad::{integrate_curve, integrate_density, QuadOptions, RegionMode};
use singauss::{BoundaryLoop, PlanarDomain, Vec2};

fn opts() -> QuadOptions {
    QuadOptions::new(1e-10, 200_000)
}

fn disk(r: f64) -> PlanarDomain {
    PlanarDomain::disk(BoundaryLoop::circle(0.0, 0.0, r, true), vec![]).unwrap()
}

fn annulus(r0: f64, r1: f64) -> PlanarDomain {
    PlanarDomain::disk(BoundaryLoop::circle(0.0, 0.0, r1, true), vec![BoundaryLoop::circle(0.0, 0.0, r0, false)]).unwrap()
}

fn one(_: Vec2) -> singauss::Result<f64> {
    Ok(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curve_integrals_are_additive(a in -2.0f64..0.0, c in 0.0f64..1.0, b in 1.0f64..3.0, k in 0.5f64..6.0) {
        let f = |s: f64| Ok((k * s).sin() + s * s);
        let whole = integrate_curve(f, &[a, b], opts()).unwrap();
        let left = integrate_curve(f, &[a, c], opts()).unwrap();
        let right = integrate_curve(f, &[c, b], opts()).unwrap();
        prop_assert!((whole.value - left.value - right.value).abs() < 1e-9);
        let exact = |s: f64| -(k * s).cos() / k + s * s * s / 3.0;
        prop_assert!((whole.value - (exact(b) - exact(a))).abs() < 1e-9);
    }

    /// A disk is the union of a smaller disk and the annulus around it.
    #[test]
    fn region_integrals_are_additive(r in 0.2f64..0.8, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let w = move |p: Vec2| Ok(1.0 + a * p.x + b * p.x * p.y + p.y * p.y);
        let whole = integrate_density(&disk(1.0), one, w, RegionMode::Signed, opts()).unwrap();
        let inner = integrate_density(&disk(r), one, w, RegionMode::Signed, opts()).unwrap();
        let outer = integrate_density(&annulus(r, 1.0), one, w, RegionMode::Signed, opts()).unwrap();
        prop_assert!((whole.value - inner.value - outer.value).abs() < 1e-8);
        // ∫ (1 + y²) over the unit disk; the odd terms vanish.
        prop_assert!((whole.value - 1.25 * PI).abs() < 1e-8);
    }

    /// Splitting by the sign of the density: signed = plus - minus, absolute = plus + minus.
    /// The one-sided line integrals have a square-root kink in `u` where the zero
    /// curve turns vertical, which limits their accuracy to about `1e-7`.
    #[test]
    fn region_modes_are_consistent(c in -0.5f64..0.5, s in 0.5f64..2.0) {
        let density = move |p: Vec2| Ok(p.x - c + 0.3 * p.y * p.y);
        let w = move |p: Vec2| Ok(s + p.y);
        let run = |mode| integrate_density(&disk(1.0), density, w, mode, opts()).unwrap().value;
        let (signed, absolute, plus, minus) =
            (run(RegionMode::Signed), run(RegionMode::Absolute), run(RegionMode::Plus), run(RegionMode::Minus));
        prop_assert!((signed - (plus - minus)).abs() < 1e-6, "{signed} vs {plus} - {minus}");
        prop_assert!((absolute - (plus + minus)).abs() < 1e-6, "{absolute} vs {plus} + {minus}");
        prop_assert!(plus >= 0.0 && minus >= 0.0);
    }
}

#[test]
fn half_disk_moment() {
    // ∫ y over the upper half of the unit disk.
    let plus = integrate_density(&disk(1.0), |p| Ok(p.y), one, RegionMode::Plus, opts()).unwrap();
    assert!((plus.value - 2.0 / 3.0).abs() < 1e-9);
    assert!(plus.error < 1e-8);
}

#[test]
fn strip_area() {
    let strip = PlanarDomain::flat_strip(1.0, 0.0, 2.0).unwrap();
    let area = integrate_density(&strip, one, |p| Ok(1.0 + (2.0 * PI * p.x).sin()), RegionMode::Signed, opts()).unwrap();
    assert!((area.value - 2.0).abs() < 1e-9);
}

#[test]
fn invalid_options_are_rejected() {
    assert!(integrate_curve(Ok, &[0.0, 1.0], QuadOptions::new(-1.0, 10)).is_err());
    assert!(integrate_curve(Ok, &[1.0, 0.0], opts()).is_err());
}

//! Fixed scenarios shared by the benchmarks.

use singauss::theorems::Scenario;
use singauss::{MetricChart, PlanarDomain, SurfaceMap};

pub fn flat_disk(name: &str, x: &str, y: &str) -> Scenario {
    let map = SurfaceMap::from_strings(x, y, MetricChart::flat()).expect("fixture map parses");
    Scenario::new(name, map, PlanarDomain::unit_disk())
}

pub fn fold_disk() -> Scenario {
    flat_disk("fold-disk", "u", "v^2")
}

pub fn cusp_disk() -> Scenario {
    flat_disk("cusp-disk", "u^3 - 3*u*v", "v")
}

/// A trigonometric perturbation of the identity with several fold curves.
pub fn wavy_disk() -> Scenario {
    flat_disk(
        "wavy-disk",
        "u + 0.21*sin(2*pi*v) - 0.13*sin(2*pi*(u + v))",
        "v + 0.27*sin(2*pi*u) + 0.08*sin(2*pi*(u - v))",
    )
}

pub fn sphere_fold() -> Scenario {
    let sphere = MetricChart::from_strings(
        "4/(1 + x^2 + y^2)^2",
        "0",
        "4/(1 + x^2 + y^2)^2",
        singauss::ChartRegion::everywhere(),
        None,
        None,
    )
    .expect("fixture metric parses");
    let map = SurfaceMap::from_strings("u", "v^2", sphere).expect("fixture map parses");
    Scenario::new("sphere-fold", map, PlanarDomain::unit_disk())
}

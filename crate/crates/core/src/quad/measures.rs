use serde::{Deserialize, Serialize};

use super::curve::{integrate_curve, Estimate, QuadOptions};
use crate::error::{Error, Result};
use crate::mapcore::{BoundaryLoop, PlanarDomain, SurfaceMap};
use crate::singular::{singular_curvature, tangent, BoundaryCrossing, SingularComponent};

/// Which boundary combination of geodesic curvature to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCombination {
    /// `∫_{∂M} κ_g ds` over the whole boundary.
    Formula1,
    /// `∫_{∂M ∩ M+} κ_g ds`.
    Formula2Plus,
    /// `∫_{∂M ∩ M-} κ_g ds`.
    Formula2Minus,
}

/// `κ_g^img ds / dt` for the image of the boundary loop at parameter `t`.
fn image_density(map: &SurfaceMap, lp: &BoundaryLoop, t: f64, near_split: bool) -> Result<f64> {
    let p = lp.point(t)?;
    let vel = lp.velocity(t)?;
    let jet = map.jet(p)?;
    let (f1, acc) = jet.push(vel, lp.accel(t)?);
    let m = map.target().jet(jet.value)?;
    let speed = m.norm(f1);
    if speed <= 1e-12 * (1.0 + jet.jacobian.frobenius()) * vel.norm() {
        // The image of a null crossing is traversed with vanishing speed; the density tends to zero there.
        if near_split {
            return Ok(0.0);
        }
        return Err(Error::SingularBoundaryTangent { u: p.x, v: p.y });
    }
    let cov = acc + m.christoffel().contract(f1, f1);
    Ok(m.area(f1, cov) / (speed * speed))
}

/// Boundary geodesic curvature term per boundary loop, in loop order.
///
/// On `∂M ∩ M-` the measure is `-κ_g^img ds`, so `Formula1` is the sum of the
/// two one-sided values and their difference is `∫ κ_g^img ds`.
pub fn boundary_geodesic_terms(
    map: &SurfaceMap,
    dom: &PlanarDomain,
    crossings: &[BoundaryCrossing],
    combination: BoundaryCombination,
    opts: QuadOptions,
) -> Result<Vec<Estimate>> {
    opts.validate()?;
    let mut out = Vec::new();
    let pieces: usize = dom.loops().len() + crossings.len();
    let piece_opts = QuadOptions { tol: opts.tol / pieces as f64, ..opts };
    for (li, lp) in dom.loops().iter().enumerate() {
        let (t0, t1) = lp.range();
        let mut cuts: Vec<f64> = crossings.iter().filter(|c| c.loop_index == li).map(|c| c.t).collect();
        cuts.sort_by(f64::total_cmp);
        let scale = 1e-6 * (t1 - t0);
        let near = |t: f64| cuts.iter().any(|&c| (t - c).abs() < scale || (t - c).abs() > (t1 - t0) - scale);
        let mut splits = vec![t0];
        splits.extend(cuts.iter().copied().filter(|&c| c > t0 && c < t1));
        splits.push(t1);
        let mut total = Estimate::ZERO;
        for w in splits.windows(2) {
            let mid = lp.point(0.5 * (w[0] + w[1]))?;
            let side = map.lambda_unchecked(mid)?.signum();
            let factor = match combination {
                BoundaryCombination::Formula1 => side,
                BoundaryCombination::Formula2Plus if side > 0.0 => 1.0,
                BoundaryCombination::Formula2Minus if side < 0.0 => -1.0,
                _ => continue,
            };
            let e = integrate_curve(|t| image_density(map, lp, t, near(t)), w, piece_opts)?;
            total = total + e.scaled(factor);
        }
        out.push(total);
    }
    Ok(out)
}

/// Sum of [`boundary_geodesic_terms`] over all boundary loops.
pub fn boundary_geodesic_term(
    map: &SurfaceMap,
    dom: &PlanarDomain,
    crossings: &[BoundaryCrossing],
    combination: BoundaryCombination,
    opts: QuadOptions,
) -> Result<Estimate> {
    let parts = boundary_geodesic_terms(map, dom, crossings, combination, opts)?;
    Ok(parts.into_iter().fold(Estimate::ZERO, |a, b| a + b))
}

/// `∫ κ_s ds` along one traced component, split at the given second-kind parameters.
pub fn singular_curvature_integral(
    map: &SurfaceMap,
    comp: &SingularComponent,
    second_kind: &[f64],
    opts: QuadOptions,
) -> Result<Estimate> {
    let mut splits = vec![0.0];
    let mut inner: Vec<f64> = second_kind.iter().copied().filter(|&s| s > 0.0 && s < comp.length).collect();
    inner.sort_by(f64::total_cmp);
    splits.extend(inner);
    splits.push(comp.length);
    let density = |s: f64| -> Result<f64> {
        let p = comp.point_at(map, s)?;
        let (t, _) = tangent(map, p)?;
        Ok(singular_curvature(map, p, t)?.1)
    };
    // The density is smooth through second-kind points, but its quotient form
    // is 0/0 there; bridge a short window by interpolation. The window must stay
    // small: near a pair of close cusps the density varies on a short scale.
    let bridge = |c: f64| -> Result<(f64, f64, f64, f64)> {
        let mut h = 1e-6 * comp.length;
        loop {
            match (density(c - h), density(c + h)) {
                (Ok(lo), Ok(hi)) => return Ok((c, h, lo, hi)),
                (Err(e), _) | (_, Err(e)) if h > 1e-3 * comp.length => return Err(e),
                _ => h *= 10.0,
            }
        }
    };
    let bridges = second_kind.iter().map(|&c| bridge(c)).collect::<Result<Vec<_>>>()?;
    integrate_curve(
        |s| {
            if let Some(&(c, h, lo, hi)) = bridges.iter().find(|b| (s - b.0).abs() < b.1) {
                return Ok(lo + (hi - lo) * (s - c + h) / (2.0 * h));
            }
            density(s)
        },
        &splits,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::singular::{trace_singular_set, TraceOptions};
    use crate::surface::MetricChart;
    use std::f64::consts::PI;

    fn flat(x: &str, y: &str) -> SurfaceMap {
        SurfaceMap::from_strings(x, y, MetricChart::flat()).unwrap()
    }

    #[test]
    fn identity_disk_boundary_is_full_turn() {
        let m = flat("u", "v");
        let e = boundary_geodesic_term(&m, &PlanarDomain::unit_disk(), &[], BoundaryCombination::Formula1, QuadOptions::default())
            .unwrap();
        assert!((e.value - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn cylinder_boundaries_are_geodesic() {
        let m = flat("u", "v");
        let dom = PlanarDomain::flat_strip(1.0, 0.0, 1.0).unwrap();
        let e = boundary_geodesic_term(&m, &dom, &[], BoundaryCombination::Formula1, QuadOptions::default()).unwrap();
        assert!(e.value.abs() < 1e-9);
    }

    #[test]
    fn fold_disk_one_sided_terms() {
        let m = flat("u", "v^2");
        let dom = PlanarDomain::unit_disk();
        let set = trace_singular_set(&m, &dom, TraceOptions::default()).unwrap();
        let opts = QuadOptions::new(1e-10, 20_000);
        let run = |c| boundary_geodesic_term(&m, &dom, &set.crossings, c, opts).unwrap().value;
        let (f1, plus, minus) = (
            run(BoundaryCombination::Formula1),
            run(BoundaryCombination::Formula2Plus),
            run(BoundaryCombination::Formula2Minus),
        );
        assert!((f1 - (plus + minus)).abs() < 2e-6);
        // The image of each half circle is the arc of y = 1 - x^2 over [-1, 1] and back.
        let oracle = integrate_curve(
            |t| {
                let (s, c) = t.sin_cos();
                Ok(2.0 * s / (1.0 + 4.0 * c * c))
            },
            &[0.0, PI],
            opts,
        )
        .unwrap();
        assert!((plus - oracle.value).abs() < 1e-8, "{plus} vs {}", oracle.value);
        assert!((minus - plus).abs() < 1e-8);
    }

    #[test]
    fn straight_fold_has_zero_singular_curvature() {
        let m = flat("u", "v^2");
        let set = trace_singular_set(&m, &PlanarDomain::unit_disk(), TraceOptions::default()).unwrap();
        let e = singular_curvature_integral(&m, &set.components[0], &[], QuadOptions::default()).unwrap();
        assert!(e.value.abs() < 1e-10);
    }
}

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::curve::{compensated_sum, integrate_curve, Estimate, QuadOptions};
use crate::error::Result;
use crate::geom::Vec2;
use crate::mapcore::{PlanarDomain, SurfaceMap};
use crate::singular::bracket_root;

const ROOT_SAMPLES: usize = 16;

/// Which part of `λ` enters a region integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionMode {
    /// `λ`: the signed area form.
    Signed,
    /// `|λ|`: the area form of the degenerate metric.
    Absolute,
    /// `λ` restricted to `M+`.
    Plus,
    /// `|λ|` restricted to `M-`.
    Minus,
}

impl RegionMode {
    fn apply(self, lam: f64) -> f64 {
        match self {
            RegionMode::Signed => lam,
            RegionMode::Absolute => lam.abs(),
            RegionMode::Plus => lam.max(0.0),
            RegionMode::Minus => (-lam).max(0.0),
        }
    }
}

struct Integrator<'a, D, W> {
    dom: &'a PlanarDomain,
    density: D,
    weight: W,
    mode: RegionMode,
    inner: QuadOptions,
    worst_inner: Cell<f64>,
}

impl<D, W> Integrator<'_, D, W>
where
    D: Fn(Vec2) -> Result<f64>,
    W: Fn(Vec2) -> Result<f64>,
{
    /// Pieces of the vertical line through `u` inside `M`, split at sign changes of `λ`.
    fn segments(&self, u: f64) -> Result<Vec<Vec<f64>>> {
        let cr = self.dom.vertical_crossings(u);
        let mut out = Vec::new();
        for pair in cr.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            let mut cuts = vec![a];
            if self.mode != RegionMode::Signed {
                let lam = |v: f64| (self.density)(Vec2::new(u, v));
                let mut prev = (a, lam(a)?);
                for k in 1..=ROOT_SAMPLES {
                    let v = a + (b - a) * k as f64 / ROOT_SAMPLES as f64;
                    let l = lam(v)?;
                    if (prev.1 < 0.0) != (l < 0.0) {
                        cuts.push(bracket_root(lam, prev.0, v, 1e-15 * (1.0 + v.abs()))?);
                    }
                    prev = (v, l);
                }
            }
            cuts.push(b);
            cuts.dedup();
            out.push(cuts);
        }
        Ok(out)
    }

    fn integrand(&self, p: Vec2) -> Result<f64> {
        let d = self.mode.apply((self.density)(p)?);
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok(d * (self.weight)(p)?)
    }

    /// Integral over the vertical line through `u`.
    fn line(&self, u: f64) -> Result<f64> {
        let mut parts = Vec::new();
        for cuts in self.segments(u)? {
            let e = integrate_curve(|v| self.integrand(Vec2::new(u, v)), &cuts, self.inner)?;
            self.worst_inner.set(self.worst_inner.get().max(e.error));
            parts.push(e.value);
        }
        Ok(compensated_sum(parts))
    }
}

/// Integrate `mode(density) * weight` over `M` as an adaptive integral in `u`
/// of exact line integrals in `v`; every line is clipped to `M` and split where
/// `density` changes sign. The sign of `density` defines `M+` and `M-`.
pub fn integrate_density(
    dom: &PlanarDomain,
    density: impl Fn(Vec2) -> Result<f64>,
    weight: impl Fn(Vec2) -> Result<f64>,
    mode: RegionMode,
    opts: QuadOptions,
) -> Result<Estimate> {
    opts.validate()?;
    let (u0, u1, _, _) = dom.bounds();
    let splits = vertical_tangents(dom, u0, u1)?;
    let width = u1 - u0;
    let it = Integrator {
        dom,
        density,
        weight,
        mode,
        inner: QuadOptions { tol: 0.25 * opts.tol / width, ..opts },
        worst_inner: Cell::new(0.0),
    };
    let outer = integrate_curve(|u| it.line(u), &splits, QuadOptions { tol: 0.5 * opts.tol, ..opts })?;
    Ok(Estimate { value: outer.value, error: outer.error + it.worst_inner.get() * width })
}

/// `u` coordinates in `[u0, u1]` where a boundary loop has a vertical tangent,
/// together with the end points; the line integrals are not smooth there.
fn vertical_tangents(dom: &PlanarDomain, u0: f64, u1: f64) -> Result<Vec<f64>> {
    let mut out = vec![u0, u1];
    for lp in dom.loops() {
        let poly = lp.polyline();
        let dx = |t: f64| Ok(lp.velocity(t)?.x);
        let mut prev = dx(poly[0].0)?;
        for w in poly.windows(2) {
            let next = dx(w[1].0)?;
            if (prev < 0.0) != (next < 0.0) {
                let t = bracket_root(dx, w[0].0, w[1].0, 1e-15)?;
                let u = dom.wrap(lp.point(t)?).x;
                if u > u0 && u < u1 {
                    out.push(u);
                }
            }
            prev = next;
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(out)
}

/// `∫_M (K_N∘f) λ du dv` (signed mode) or the `|λ|` and one-sided variants.
/// Returns exactly zero for a flat target.
pub fn integrate_region(map: &SurfaceMap, dom: &PlanarDomain, mode: RegionMode, opts: QuadOptions) -> Result<Estimate> {
    opts.validate()?;
    if map.target().is_flat() {
        return Ok(Estimate::ZERO);
    }
    integrate_density(
        dom,
        |p| map.lambda_unchecked(p),
        |p| map.target().gaussian_curvature(map.eval(p)?),
        mode,
        opts,
    )
}

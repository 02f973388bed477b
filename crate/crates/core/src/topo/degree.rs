use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mapcore::{PlanarDomain, SurfaceMap};
use crate::quad::{integrate_density, integrate_region, QuadOptions, RegionMode};
use crate::singular::SingularSet;

const CONVERGED: f64 = 1e-10;
const DEDUPE: f64 = 1e-6;
const RESAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeOptions {
    /// Newton seeds per axis over the bounding box of `M`.
    pub seeds: usize,
    /// Regular-value candidates per axis over the bounding box of `N`.
    pub candidates: usize,
    pub quad: QuadOptions,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions { seeds: 40, candidates: 16, quad: QuadOptions::new(1e-7, 20_000) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PreimageCount {
    pub value: Vec2,
    /// Distance from the value to the image of `Σ` and to `∂N`.
    pub clearance: f64,
    pub preimages: Vec<Vec2>,
    pub signs: Vec<i8>,
    pub degree: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub counts: Vec<PreimageCount>,
    /// `∫_M (K_N∘f) dÂ / ∫_N K_N dA` when the target is curved.
    pub integral_ratio: Option<f64>,
}

fn extent(dom: &PlanarDomain) -> f64 {
    let (u0, u1, v0, v1) = dom.bounds();
    (u1 - u0).max(v1 - v0)
}

/// Check `f(∂M) ⊆ ∂N`, `f(M \ ∂M) ⊆ N \ ∂N` on samples, and transversality of `f` to `∂N`.
pub fn check_boundary_compatibility(
    map: &SurfaceMap,
    dom: &PlanarDomain,
    target: &PlanarDomain,
    set: &SingularSet,
) -> Result<()> {
    let scale = extent(target);
    for lp in dom.loops() {
        for &(_, p) in lp.polyline().iter().step_by(4) {
            let q = map.eval(p)?;
            let d = target.distance_to_boundary(q);
            if d > 1e-4 * scale {
                return Err(Error::Hypothesis(format!(
                    "boundary point ({:.6}, {:.6}) maps {d:.2e} away from the target boundary",
                    p.x, p.y
                )));
            }
        }
    }
    let (u0, u1, v0, v1) = dom.bounds();
    let margin = 0.02 * extent(dom);
    let n = 24;
    for i in 0..n {
        for j in 0..n {
            let p = Vec2::new(
                u0 + (u1 - u0) * (i as f64 + 0.5) / n as f64,
                v0 + (v1 - v0) * (j as f64 + 0.5) / n as f64,
            );
            if !dom.contains(p) || dom.distance_to_boundary(p) < margin {
                continue;
            }
            let q = map.eval(p)?;
            if !target.contains(q) || target.distance_to_boundary(q) < 1e-9 * scale {
                return Err(Error::Hypothesis(format!(
                    "interior point ({:.6}, {:.6}) maps to ({:.6}, {:.6}), outside the open target",
                    p.x, p.y, q.x, q.y
                )));
            }
        }
    }
    for c in &set.crossings {
        let j = map.jacobian(c.point)?;
        let col = if j.apply(Vec2::new(1.0, 0.0)).norm() >= j.apply(Vec2::new(0.0, 1.0)).norm() {
            j.apply(Vec2::new(1.0, 0.0))
        } else {
            j.apply(Vec2::new(0.0, 1.0))
        };
        let q = map.eval(c.point)?;
        let tn = boundary_tangent(target, q);
        if col.norm() == 0.0 || col.normalized().cross(tn).abs() < 1e-4 {
            return Err(Error::Hypothesis(format!(
                "f is not transverse to the target boundary at ({:.6}, {:.6})",
                c.point.x, c.point.y
            )));
        }
    }
    Ok(())
}

/// Unit tangent of the nearest boundary polyline segment of `dom` at `q`.
fn boundary_tangent(dom: &PlanarDomain, q: Vec2) -> Vec2 {
    let mut best = (f64::INFINITY, Vec2::new(1.0, 0.0));
    for lp in dom.loops() {
        for w in lp.polyline().windows(2) {
            let a = q - dom.delta(w[0].1, q);
            let d = w[1].1 - w[0].1;
            let s = ((q - a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
            let dist = (a + d * s - q).norm();
            if dist < best.0 {
                best = (dist, d.normalized());
            }
        }
    }
    best.1
}

struct Solver<'a> {
    map: &'a SurfaceMap,
    dom: &'a PlanarDomain,
    target: &'a PlanarDomain,
    seeds: Vec<Vec2>,
}

impl Solver<'_> {
    fn newton(&self, q: Vec2, mut p: Vec2) -> Option<Vec2> {
        let step_cap = 0.25 * extent(self.dom);
        for _ in 0..60 {
            let r = self.target.delta(q, self.map.eval(p).ok()?);
            if r.norm() < CONVERGED {
                let p = self.dom.wrap(p);
                return self.dom.contains(p).then_some(p);
            }
            let j = self.map.jacobian(p).ok()?;
            if j.det().abs() < 1e-14 {
                return None;
            }
            let mut step = j.inverse()?.apply(r);
            if step.norm() > step_cap {
                step = step * (step_cap / step.norm());
            }
            p = p - step;
            if !p.is_finite() {
                return None;
            }
        }
        None
    }

    fn count(&self, q: Vec2, clearance: f64) -> Result<Option<PreimageCount>> {
        let mut pre: Vec<Vec2> = Vec::new();
        for &s in &self.seeds {
            if let Some(p) = self.newton(q, s) {
                if !pre.iter().any(|&x| self.dom.delta(x, p).norm() < DEDUPE) {
                    pre.push(p);
                }
            }
        }
        pre.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).expect("finite preimages"));
        let mut signs = Vec::new();
        for &p in &pre {
            let l = self.map.signed_area_density(p)?;
            let j = self.map.jacobian(p)?;
            if l.abs() < 1e-8 * (1.0 + j.frobenius() * j.frobenius()) {
                return Ok(None);
            }
            signs.push(if l > 0.0 { 1 } else { -1 });
        }
        let degree = signs.iter().map(|&s| s as i64).sum();
        Ok(Some(PreimageCount { value: q, clearance, preimages: pre, signs, degree }))
    }
}

/// Candidate regular values on a lattice in `N`, best clearance first.
fn candidates(target: &PlanarDomain, obstacles: &[Vec2], n: usize, jitter: f64) -> Vec<(Vec2, f64)> {
    let (u0, u1, v0, v1) = target.bounds();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let q = Vec2::new(
                u0 + (u1 - u0) * (i as f64 + 0.5 + jitter) / n as f64,
                v0 + (v1 - v0) * (j as f64 + 0.5 + 0.7 * jitter) / n as f64,
            );
            if !target.contains(q) {
                continue;
            }
            let mut clear = target.distance_to_boundary(q);
            for &o in obstacles {
                clear = clear.min(target.delta(q, o).norm());
            }
            out.push((q, clear));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// Degree of `f: (M, ∂M) -> (N, ∂N)` by signed preimage counts at two regular values.
pub fn mapping_degree(
    map: &SurfaceMap,
    dom: &PlanarDomain,
    target: &PlanarDomain,
    set: &SingularSet,
    opts: DegreeOptions,
) -> Result<DegreeReport> {
    check_boundary_compatibility(map, dom, target, set)?;
    let mut obstacles = Vec::new();
    for comp in &set.components {
        for s in &comp.samples {
            obstacles.push(map.eval(s.point)?);
        }
    }
    let (u0, u1, v0, v1) = dom.bounds();
    let mut seeds = Vec::new();
    for i in 0..opts.seeds {
        for j in 0..opts.seeds {
            let p = Vec2::new(
                u0 + (u1 - u0) * (i as f64 + 0.5) / opts.seeds as f64,
                v0 + (v1 - v0) * (j as f64 + 0.5) / opts.seeds as f64,
            );
            if dom.contains(p) {
                seeds.push(p);
            }
        }
    }
    let solver = Solver { map, dom, target, seeds };
    let scale = extent(target);
    let mut counts: Vec<PreimageCount> = Vec::new();
    'attempts: for attempt in 0..RESAMPLES {
        counts.clear();
        let jitter = 0.37 * attempt as f64 % 0.5;
        let cands = candidates(target, &obstacles, opts.candidates, jitter);
        let Some(&(q1, c1)) = cands.first() else { continue };
        if c1 < 1e-3 * scale {
            continue;
        }
        let second = cands
            .iter()
            .skip(1)
            .find(|(q, c)| *c >= 0.5 * c1 && target.delta(q1, *q).norm() > 0.25 * scale)
            .or_else(|| cands.get(1))
            .copied();
        let Some((q2, c2)) = second else { continue };
        for (q, c) in [(q1, c1), (q2, c2)] {
            match solver.count(q, c)? {
                Some(pc) => counts.push(pc),
                None => continue 'attempts,
            }
        }
        break;
    }
    if counts.len() < 2 {
        return Err(Error::ValueTooCloseToCritical);
    }
    let degree = counts[0].degree;
    if counts[1].degree != degree {
        return Err(Error::CrossCheckMismatch(format!(
            "regular values give degrees {} and {}",
            counts[0].degree, counts[1].degree
        )));
    }
    let mut integral_ratio = None;
    if !map.target().is_flat() {
        let chart = map.target();
        let total_n = integrate_density(
            target,
            |q| chart.area_density(q),
            |q| chart.gaussian_curvature(q),
            RegionMode::Signed,
            opts.quad,
        )?;
        if total_n.value.abs() > 1e-6 {
            let total_m = integrate_region(map, dom, RegionMode::Signed, opts.quad)?;
            let ratio = total_m.value / total_n.value;
            if (ratio - degree as f64).abs() > 0.05 {
                return Err(Error::CrossCheckMismatch(format!(
                    "preimage degree {degree} but curvature ratio {ratio:.6}"
                )));
            }
            integral_ratio = Some(ratio);
        }
    }
    Ok(DegreeReport { degree, counts, integral_ratio })
}

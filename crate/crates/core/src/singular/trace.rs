//! Predictor-corrector tracing of the level set `λ = 0`.
//!
//! Every component is oriented by the unit tangent `T = (λ_v, -λ_u)/|∇λ|`,
//! which keeps `M+` on its left. The curve parameter `σ` is arclength.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mapcore::{PlanarDomain, SurfaceMap};

/// Newton refinement target for `|λ|` on traced points.
pub const LAMBDA_TOL: f64 = 1e-10;
/// Smallest admissible `|dλ|` on `Σ`.
pub const NONDEGENERACY_FLOOR: f64 = 1e-6;
const MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Seed grid cells per side of the domain bounding box.
    pub resolution: usize,
    /// Predictor step; defaults to the bounding-box extent over `2 * resolution`.
    pub step: Option<f64>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { resolution: 64, step: None }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularSample {
    pub point: Vec2,
    pub sigma: f64,
    /// Unit tangent with `M+` on the left.
    pub tangent: Vec2,
    /// Null direction, continuous along the component.
    pub null: Vec2,
    /// `det(γ', η)`.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Topology {
    Closed,
    Arc,
}

/// A point of `Σ ∩ ∂M`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryCrossing {
    pub loop_index: usize,
    pub t: f64,
    pub point: Vec2,
    /// `det(T_Σ, T_∂M)` of the unit tangents; `0` when the crossing is tangential.
    pub transversality: f64,
    pub tangential: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularComponent {
    pub samples: Vec<SingularSample>,
    pub topology: Topology,
    pub length: f64,
    /// `γ(L) - γ(0)`; nonzero only for loops winding around a strip.
    pub shift: Vec2,
    /// Crossing indices at the two ends of an arc.
    pub start: Option<usize>,
    pub end: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularSet {
    pub components: Vec<SingularComponent>,
    pub crossings: Vec<BoundaryCrossing>,
    pub step: f64,
}

/// Unit tangent field of `Σ` and `|∇λ|` at `p`.
pub fn tangent(map: &SurfaceMap, p: Vec2) -> Result<(Vec2, f64)> {
    let g = map.dlambda(p)?;
    let n = g.norm();
    if !(n >= NONDEGENERACY_FLOOR) {
        return Err(Error::Degenerate { u: p.x, v: p.y, grad: n });
    }
    Ok((Vec2::new(g.y, -g.x) * (1.0 / n), n))
}

/// Newton projection onto `λ = 0` along `∇λ`.
pub fn project(map: &SurfaceMap, mut p: Vec2) -> Result<Vec2> {
    for _ in 0..60 {
        let l = map.lambda_unchecked(p)?;
        if l.abs() <= LAMBDA_TOL {
            return Ok(p);
        }
        let g = map.dlambda(p)?;
        let n2 = g.dot(g);
        if !(n2.sqrt() >= NONDEGENERACY_FLOOR) {
            return Err(Error::Degenerate { u: p.x, v: p.y, grad: n2.sqrt() });
        }
        let step = g * (l / n2);
        p = p - step;
        if step.norm() < 1e-15 * (1.0 + p.norm()) {
            break;
        }
    }
    let l = map.lambda_unchecked(p)?;
    if l.abs() <= 100.0 * LAMBDA_TOL {
        Ok(p)
    } else {
        Err(Error::Tracing(format!("projection onto λ = 0 stalled at ({}, {}) with λ = {l:e}", p.x, p.y)))
    }
}

/// Largest tangent turn accepted within one RK4 step.
const MAX_TURN: f64 = 0.05;

/// Move arclength `s` along the tangent field followed by projection; steps
/// through sharp turns are halved until each turns less than `MAX_TURN`.
pub fn advance(map: &SurfaceMap, p: Vec2, s: f64) -> Result<Vec2> {
    advance_within(map, p, s, 0)
}

fn advance_within(map: &SurfaceMap, p: Vec2, s: f64, depth: u32) -> Result<Vec2> {
    if s == 0.0 {
        return Ok(p);
    }
    let k1 = tangent(map, p)?.0;
    let k2 = tangent(map, p + k1 * (0.5 * s))?.0;
    let k3 = tangent(map, p + k2 * (0.5 * s))?.0;
    let k4 = tangent(map, p + k3 * s)?.0;
    if depth < 16 && k1.cross(k4).abs().max(-k1.dot(k4)) > MAX_TURN.sin() {
        let mid = advance_within(map, p, 0.5 * s, depth + 1)?;
        return advance_within(map, mid, 0.5 * s, depth + 1);
    }
    project(map, p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (s / 6.0))
}

fn make_sample(map: &SurfaceMap, p: Vec2, sigma: f64, previous: Option<Vec2>) -> Result<SingularSample> {
    let (t, _) = tangent(map, p)?;
    let mut eta = map.null_direction(p, Some(t))?;
    if let Some(prev) = previous {
        if eta.dot(prev) < 0.0 {
            eta = -eta;
        }
    }
    Ok(SingularSample { point: p, sigma, tangent: t, null: eta, delta: t.cross(eta) })
}

impl SingularComponent {
    /// Point of the component at arclength `σ`; closed loops are continued periodically.
    pub fn point_at(&self, map: &SurfaceMap, sigma: f64) -> Result<Vec2> {
        let (s, offset) = match self.topology {
            Topology::Arc => (sigma.clamp(0.0, self.length), Vec2::ZERO),
            Topology::Closed => {
                let k = (sigma / self.length).floor();
                (sigma - k * self.length, self.shift * k)
            }
        };
        let i = match self.samples.binary_search_by(|x| x.sigma.total_cmp(&s)) {
            Ok(i) => return Ok(self.samples[i].point + offset),
            Err(i) => i.saturating_sub(1),
        };
        let base = &self.samples[i];
        Ok(advance(map, base.point, s - base.sigma)? + offset)
    }

    /// Null direction at `σ`, with the sign continued from the nearest sample.
    pub fn null_at(&self, map: &SurfaceMap, sigma: f64, point: Vec2) -> Result<Vec2> {
        let s = match self.topology {
            Topology::Arc => sigma.clamp(0.0, self.length),
            Topology::Closed => sigma.rem_euclid(self.length),
        };
        let i = match self.samples.binary_search_by(|x| x.sigma.total_cmp(&s)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let reference = self.samples[i].null;
        let (t, _) = tangent(map, point)?;
        let eta = map.null_direction(point, Some(t))?;
        Ok(if eta.dot(reference) < 0.0 { -eta } else { eta })
    }

    /// `δ(σ) = det(γ'(σ), η(σ))` with the continuous null field.
    pub fn delta_at(&self, map: &SurfaceMap, sigma: f64) -> Result<f64> {
        let p = self.point_at(map, sigma)?;
        let (t, _) = tangent(map, p)?;
        Ok(t.cross(self.null_at(map, sigma, p)?))
    }
}

/// Illinois false-position root of `g` on a bracketing interval.
pub(crate) fn bracket_root(mut g: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let (mut fa, mut fb) = (g(a)?, g(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = g(c)?;
        if fc == 0.0 || (b - a).abs() < tol {
            return Ok(c);
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section minimization of `g` on `[a, b]`.
pub(crate) fn golden_min(mut g: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, iters: usize) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// A local minimum of `|λ|` on `∂M` closer to `Σ` than this fraction of the
/// domain size counts as tangential contact.
pub const NEAR_CONTACT: f64 = 1e-4;

/// Points where `Σ` meets the boundary loops.
pub fn boundary_crossings(map: &SurfaceMap, dom: &PlanarDomain) -> Result<Vec<BoundaryCrossing>> {
    let mut out = Vec::new();
    let extent = {
        let (u0, u1, v0, v1) = dom.bounds();
        (u1 - u0).max(v1 - v0)
    };
    for (li, lp) in dom.loops().iter().enumerate() {
        let lam = |t: f64| -> Result<f64> { map.signed_area_density(lp.point(t)?) };
        let poly = lp.polyline();
        let mut values: Vec<f64> = poly.iter().map(|&(t, _)| lam(t)).collect::<Result<_>>()?;
        // Both ends are the same boundary point; one sign for it.
        let last = values.len() - 1;
        values[last] = values[0];
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let n = values.len();
        let mut roots: Vec<(f64, bool)> = Vec::new();
        for i in 0..n - 1 {
            let (a, b) = (values[i], values[i + 1]);
            if (a < 0.0) != (b < 0.0) {
                let t = if i + 1 == n - 1 {
                    let end = poly[n - 1].0;
                    bracket_root(|t| if t >= end { Ok(b) } else { lam(t) }, poly[i].0, end, 1e-15)?
                } else {
                    bracket_root(lam, poly[i].0, poly[i + 1].0, 1e-15)?
                };
                roots.push((t, false));
            }
        }
        // Near-zero local minima of |λ| without a sign change mark tangential contact.
        for i in 0..n - 1 {
            let prev = if i == 0 { values[n - 2] } else { values[i - 1] };
            let next = values[i + 1];
            let v = values[i];
            let local_min = v.abs() <= prev.abs() && v.abs() <= next.abs();
            let sign_change = (prev < 0.0) != (v < 0.0) || (v < 0.0) != (next < 0.0);
            if local_min && !sign_change && v.abs() < 1e-2 * scale {
                let (ta, tb) = if i == 0 {
                    (poly[0].0, poly[1].0)
                } else {
                    (poly[i - 1].0, poly[i + 1].0)
                };
                let (t, m) = golden_min(|t| Ok(lam(t)?.abs()), ta, tb, 80)?;
                let grad = map.dlambda(lp.point(t)?)?.norm();
                if m < 1e-9 || m < NEAR_CONTACT * extent * grad {
                    roots.push((t, true));
                }
            }
        }
        let (t0, t1) = lp.range();
        for (t, tangential) in roots {
            let t = if t >= t1 { t0 } else { t };
            let point = lp.point(t)?;
            if out.iter().any(|c: &BoundaryCrossing| c.loop_index == li && dom.delta(c.point, point).norm() < 1e-9) {
                continue;
            }
            let transversality = if tangential {
                0.0
            } else {
                let (ts, _) = tangent(map, point)?;
                ts.cross(lp.velocity(t)?.normalized())
            };
            out.push(BoundaryCrossing { loop_index: li, t, point, transversality, tangential });
        }
    }
    Ok(out)
}

fn inward_normal(dom: &PlanarDomain, c: &BoundaryCrossing) -> Result<Vec2> {
    Ok(dom.loops()[c.loop_index].velocity(c.t)?.perp())
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let d = b - a;
    let len2 = d.dot(d);
    let s = if len2 > 0.0 { ((p - a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((p - (a + d * s)).norm(), s)
}

/// Step length `s` in `[0, 2 hi]` from `p` whose trajectory passes closest to `target`.
fn partial_step(map: &SurfaceMap, p: Vec2, target: Vec2, hi: f64) -> Result<f64> {
    Ok(golden_min(|s| Ok((advance(map, p, s)? - target).norm()), 0.0, 2.0 * hi, 80)?.0)
}

/// Largest tangent turn between consecutive samples.
const SAMPLE_TURN: f64 = 0.1;

/// One tracing step from `p`, shortened so that the chord stays close to the
/// curve. `hs` carries the current step length and recovers towards `h`.
fn limited_step(map: &SurfaceMap, p: Vec2, hs: &mut f64, h: f64) -> Result<(Vec2, f64)> {
    let t0 = tangent(map, p)?.0;
    loop {
        let q = advance(map, p, *hs)?;
        let t1 = tangent(map, q)?.0;
        if t0.cross(t1).abs().max(-t0.dot(t1)) <= SAMPLE_TURN.sin() || *hs <= h / 256.0 {
            let used = *hs;
            *hs = (2.0 * *hs).min(h);
            return Ok((q, used));
        }
        *hs *= 0.5;
    }
}

/// Step length in `[0, h]` at which the trajectory from `p` leaves `M`.
fn exit_step(map: &SurfaceMap, dom: &PlanarDomain, p: Vec2, h: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dom.contains(advance(map, p, mid)?) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Trace every component of `Σ` in `M`.
pub fn trace_singular_set(map: &SurfaceMap, dom: &PlanarDomain, opts: TraceOptions) -> Result<SingularSet> {
    let (u0, u1, v0, v1) = dom.bounds();
    let extent = (u1 - u0).max(v1 - v0);
    let n = opts.resolution.max(4);
    let h = opts.step.unwrap_or(extent / (2.0 * n as f64));
    let crossings = boundary_crossings(map, dom)?;
    let mut components = Vec::new();
    let mut used_end = vec![false; crossings.len()];

    // Arcs: start at every crossing where the tangent enters M.
    let mut roles = Vec::with_capacity(crossings.len());
    for c in &crossings {
        if c.tangential {
            roles.push(0i8);
            continue;
        }
        let (t, _) = tangent(map, c.point)?;
        let dot = t.dot(inward_normal(dom, c)?);
        roles.push(if dot > 0.0 { 1 } else { -1 });
    }
    for (ci, c) in crossings.iter().enumerate() {
        if roles[ci] != 1 {
            continue;
        }
        let mut samples = vec![make_sample(map, c.point, 0.0, None)?];
        let mut p = c.point;
        let mut sigma = 0.0;
        let mut steps = 0usize;
        let mut hs = h;
        let end = loop {
            let (q, used) = limited_step(map, p, &mut hs, h)?;
            if !dom.contains(q) {
                let s = exit_step(map, dom, p, used)?;
                let exit = advance(map, p, s)?;
                let mut best: Option<(usize, f64)> = None;
                for (k, e) in crossings.iter().enumerate() {
                    if roles[k] != -1 || used_end[k] {
                        continue;
                    }
                    let d = dom.delta(exit, e.point).norm();
                    if d < 2.0 * h && best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((k, d));
                    }
                }
                let Some((k, _)) = best else {
                    return Err(Error::Tracing(format!(
                        "singular arc left the domain near ({}, {}) away from any boundary crossing",
                        q.x, q.y
                    )));
                };
                used_end[k] = true;
                let target = p + dom.delta(p, crossings[k].point);
                sigma += s;
                let prev = samples.last().map(|x| x.null);
                let mut last = make_sample(map, target, sigma, prev)?;
                last.point = target;
                samples.push(last);
                break k;
            }
            sigma += used;
            let prev = samples.last().map(|x| x.null);
            samples.push(make_sample(map, q, sigma, prev)?);
            p = q;
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Tracing("singular arc did not reach the boundary".into()));
            }
        };
        components.push(SingularComponent {
            length: sigma,
            samples,
            topology: Topology::Arc,
            shift: Vec2::ZERO,
            start: Some(ci),
            end: Some(end),
        });
    }

    // Closed loops: seeds from sign changes on the grid not already covered.
    let du = (u1 - u0) / n as f64;
    let dv = (v1 - v0) / n as f64;
    let node = |i: usize, j: usize| Vec2::new(u0 + du * i as f64, v0 + dv * j as f64);
    let mut grid = vec![f64::NAN; (n + 1) * (n + 1)];
    for i in 0..=n {
        for j in 0..=n {
            if let Ok(l) = map.lambda_unchecked(node(i, j)) {
                grid[i * (n + 1) + j] = l;
            }
        }
    }
    let mut seeds = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let a = grid[i * (n + 1) + j];
            for (di, dj) in [(1usize, 0usize), (0, 1)] {
                if i + di > n || j + dj > n {
                    continue;
                }
                let b = grid[(i + di) * (n + 1) + j + dj];
                if !(a.is_finite() && b.is_finite()) || (a < 0.0) == (b < 0.0) {
                    continue;
                }
                let (pa, pb) = (node(i, j), node(i + di, j + dj));
                let s = bracket_root(|s| map.lambda_unchecked(pa + (pb - pa) * s), 0.0, 1.0, 1e-13)?;
                let seed = pa + (pb - pa) * s;
                if dom.contains(seed) && dom.distance_to_boundary(seed) > 0.5 * h {
                    if let Ok(seed) = project(map, seed) {
                        seeds.push(seed);
                    }
                }
            }
        }
    }
    let covered = |comps: &[SingularComponent], s: Vec2| {
        comps.iter().any(|c| {
            let near = |p: Vec2, q: Vec2| {
                let a = s + dom.delta(s, p);
                segment_distance(s, a, a + (q - p)).0 < 0.25 * h
            };
            let closing = match (c.topology, c.samples.first(), c.samples.last()) {
                (Topology::Closed, Some(first), Some(last)) => near(last.point, first.point + c.shift),
                _ => false,
            };
            closing
                || c.samples.windows(2).any(|w| near(w[0].point, w[1].point))
                || c.samples.iter().any(|x| dom.delta(s, x.point).norm() < 0.5 * h)
        })
    };
    for seed in seeds {
        if covered(&components, seed) {
            continue;
        }
        let mut samples = vec![make_sample(map, seed, 0.0, None)?];
        let mut p = seed;
        let mut sigma = 0.0;
        let mut steps = 0usize;
        let mut hs = h;
        let (length, shift) = loop {
            let (q, used) = limited_step(map, p, &mut hs, h)?;
            if !dom.contains(q) {
                return Err(Error::Tracing(format!(
                    "closed singular curve through ({}, {}) left the domain",
                    seed.x, seed.y
                )));
            }
            if samples.len() >= 3 {
                let target = p + dom.delta(p, seed);
                let (d, _) = segment_distance(target, p, q);
                if d < 0.25 * used {
                    let s = partial_step(map, p, target, used)?;
                    let mut shift = target - seed;
                    if let Some(period) = dom.period() {
                        shift = Vec2::new(period * (shift.x / period).round(), 0.0);
                    }
                    break (sigma + s, shift);
                }
            }
            sigma += used;
            let prev = samples.last().map(|x| x.null);
            samples.push(make_sample(map, q, sigma, prev)?);
            p = q;
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Tracing("closed singular curve did not close up".into()));
            }
        };
        components.push(SingularComponent {
            samples,
            topology: Topology::Closed,
            length,
            shift,
            start: None,
            end: None,
        });
    }
    Ok(SingularSet { components, crossings, step: h })
}

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Tape, Vars};
use crate::geom::Vec2;

const POLY_SAMPLES: usize = 1024;
const BUCKETS: usize = 64;

/// A smooth boundary curve `t -> (u(t), v(t))` for `t` in `[t0, t1]`.
///
/// The end point equals the start point, or differs from it by one period
/// for the two boundary curves of a strip.
#[derive(Debug, Clone)]
pub struct BoundaryLoop {
    exprs: [Expr; 2],
    value: [Tape; 2],
    first: [Tape; 2],
    second: [Tape; 2],
    t0: f64,
    t1: f64,
    poly: Vec<(f64, Vec2)>,
}

impl BoundaryLoop {
    pub fn vars() -> Vars {
        Vars::new(&["t"])
    }

    pub fn new(u: Expr, v: Expr, t0: f64, t1: f64) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidDomain(format!("empty loop parameter range [{t0}, {t1}]")));
        }
        let du = u.differentiate(0);
        let dv = v.differentiate(0);
        let mut lp = BoundaryLoop {
            value: [Tape::new(&u), Tape::new(&v)],
            first: [Tape::new(&du), Tape::new(&dv)],
            second: [Tape::new(&du.differentiate(0)), Tape::new(&dv.differentiate(0))],
            exprs: [u, v],
            t0,
            t1,
            poly: Vec::new(),
        };
        let mut poly = Vec::with_capacity(POLY_SAMPLES + 1);
        for i in 0..=POLY_SAMPLES {
            let t = t0 + (t1 - t0) * i as f64 / POLY_SAMPLES as f64;
            poly.push((t, lp.point(t)?));
        }
        lp.poly = poly;
        Ok(lp)
    }

    pub fn from_strings(u: &str, v: &str, t0: f64, t1: f64) -> Result<Self> {
        let vars = Self::vars();
        Self::new(parse(u, &vars)?, parse(v, &vars)?, t0, t1)
    }

    /// Circle of radius `r`; counterclockwise when `ccw`.
    pub fn circle(cx: f64, cy: f64, r: f64, ccw: bool) -> Self {
        let s = if ccw { "" } else { "-" };
        Self::from_strings(
            &format!("{cx} + {r}*cos(t)"),
            &format!("{cy} + {s}{r}*sin(t)"),
            0.0,
            std::f64::consts::TAU,
        )
        .expect("circle loop is valid")
    }

    pub fn components(&self) -> &[Expr; 2] {
        &self.exprs
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn point(&self, t: f64) -> Result<Vec2> {
        Ok(Vec2::new(self.value[0].eval(&[t])?, self.value[1].eval(&[t])?))
    }

    pub fn velocity(&self, t: f64) -> Result<Vec2> {
        Ok(Vec2::new(self.first[0].eval(&[t])?, self.first[1].eval(&[t])?))
    }

    pub fn accel(&self, t: f64) -> Result<Vec2> {
        Ok(Vec2::new(self.second[0].eval(&[t])?, self.second[1].eval(&[t])?))
    }

    /// Sampled polyline `(t_i, c(t_i))` including both end points.
    pub fn polyline(&self) -> &[(f64, Vec2)] {
        &self.poly
    }

    /// `c(t1) - c(t0)`.
    pub fn closing_shift(&self) -> Vec2 {
        self.poly[self.poly.len() - 1].1 - self.poly[0].1
    }

    /// Solve `u(t) = target` on `[a, b]` where the sign of `u - target` differs at the ends.
    fn solve_u(&self, target: f64, mut a: f64, mut b: f64) -> Result<f64> {
        let g = |t: f64| -> Result<f64> { Ok(self.value[0].eval(&[t])? - target) };
        let (mut fa, mut fb) = (g(a)?, g(b)?);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        // Illinois false position with a bisection fallback.
        let mut side = 0i8;
        for _ in 0..100 {
            let mut c = (a * fb - b * fa) / (fb - fa);
            if !(c > a.min(b) && c < a.max(b)) {
                c = 0.5 * (a + b);
            }
            let fc = g(c)?;
            if fc == 0.0 || (b - a).abs() < 1e-15 * (1.0 + c.abs()) {
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
}

/// Topological type of the planar domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// Region inside one counterclockwise outer loop.
    Disk,
    /// `u`-periodic strip between a lower curve (traversed in `+u`) and an
    /// upper curve (traversed in `-u`).
    Strip { period: f64 },
}

#[derive(Debug, Clone)]
struct Segment {
    loop_index: usize,
    index: usize,
}

/// Compact planar domain with boundary oriented so that `M` lies on the left.
#[derive(Debug, Clone)]
pub struct PlanarDomain {
    kind: DomainKind,
    loops: Vec<BoundaryLoop>,
    outer_count: usize,
    u_min: f64,
    u_max: f64,
    v_min: f64,
    v_max: f64,
    buckets: Vec<Vec<Segment>>,
}

impl PlanarDomain {
    pub fn disk(outer: BoundaryLoop, inner: Vec<BoundaryLoop>) -> Result<Self> {
        let mut loops = vec![outer];
        loops.extend(inner);
        Self::build(DomainKind::Disk, loops, 1)
    }

    pub fn strip(period: f64, lower: BoundaryLoop, upper: BoundaryLoop, inner: Vec<BoundaryLoop>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidDomain(format!("strip period must be positive, got {period}")));
        }
        let mut loops = vec![lower, upper];
        loops.extend(inner);
        Self::build(DomainKind::Strip { period }, loops, 2)
    }

    /// Unit disk, the most common test domain.
    pub fn unit_disk() -> Self {
        Self::disk(BoundaryLoop::circle(0.0, 0.0, 1.0, true), vec![]).expect("unit disk is valid")
    }

    /// Straight strip `[0, period) x [v0, v1]`.
    pub fn flat_strip(period: f64, v0: f64, v1: f64) -> Result<Self> {
        let lower = BoundaryLoop::from_strings("t", &format!("{v0}"), 0.0, period)?;
        let upper = BoundaryLoop::from_strings(&format!("{period} - t"), &format!("{v1}"), 0.0, period)?;
        Self::strip(period, lower, upper, vec![])
    }

    fn build(kind: DomainKind, loops: Vec<BoundaryLoop>, outer_count: usize) -> Result<Self> {
        let scale = loops
            .iter()
            .flat_map(|l| l.poly.iter().map(|(_, p)| p.norm()))
            .fold(1.0f64, f64::max);
        for (i, l) in loops.iter().enumerate() {
            for &(t, _) in &l.poly {
                let speed = l.velocity(t)?.norm();
                if !(speed > 1e-9 * scale) {
                    return Err(Error::InvalidDomain(format!("boundary loop {i} is not regular at t = {t}")));
                }
            }
            let expected = match (kind, i < outer_count, i) {
                (DomainKind::Strip { period }, true, 0) => Vec2::new(period, 0.0),
                (DomainKind::Strip { period }, true, _) => Vec2::new(-period, 0.0),
                _ => Vec2::ZERO,
            };
            if (l.closing_shift() - expected).norm() > 1e-9 * scale {
                return Err(Error::InvalidDomain(format!(
                    "boundary loop {i} does not close up (end - start = ({}, {}))",
                    l.closing_shift().x,
                    l.closing_shift().y
                )));
            }
        }
        let (mut u_min, mut u_max, mut v_min, mut v_max) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for l in &loops {
            for &(_, p) in &l.poly {
                u_min = u_min.min(p.x);
                u_max = u_max.max(p.x);
                v_min = v_min.min(p.y);
                v_max = v_max.max(p.y);
            }
        }
        let mut dom = PlanarDomain {
            kind,
            loops,
            outer_count,
            u_min,
            u_max,
            v_min,
            v_max,
            buckets: vec![Vec::new(); BUCKETS],
        };
        for (li, l) in dom.loops.iter().enumerate() {
            for si in 0..l.poly.len() - 1 {
                let (a, b) = (l.poly[si].1.x, l.poly[si + 1].1.x);
                let (lo, hi) = (dom.bucket(a.min(b)), dom.bucket(a.max(b)));
                for bucket in &mut dom.buckets[lo..=hi] {
                    bucket.push(Segment { loop_index: li, index: si });
                }
            }
        }
        dom.validate_layout()?;
        Ok(dom)
    }

    fn bucket(&self, u: f64) -> usize {
        let w = (self.u_max - self.u_min).max(1e-300);
        (((u - self.u_min) / w * BUCKETS as f64).floor().max(0.0) as usize).min(BUCKETS - 1)
    }

    fn validate_layout(&self) -> Result<()> {
        for (i, l) in self.loops.iter().enumerate() {
            let area = polygon_area(&l.poly);
            match (self.kind, i < self.outer_count) {
                (DomainKind::Disk, true) if area <= 0.0 => {
                    return Err(Error::InvalidDomain("outer boundary loop must run counterclockwise".into()))
                }
                (_, false) if area >= 0.0 => {
                    return Err(Error::InvalidDomain(format!("inner boundary loop {i} must run clockwise")))
                }
                _ => {}
            }
        }
        // Pairwise disjointness via segment intersection, including periodic copies.
        let shifts: Vec<f64> = match self.kind {
            DomainKind::Disk => vec![0.0],
            DomainKind::Strip { period } => vec![-period, 0.0, period],
        };
        for i in 0..self.loops.len() {
            for j in i + 1..self.loops.len() {
                for &s in &shifts {
                    if polylines_intersect(&self.loops[i].poly, &self.loops[j].poly, Vec2::new(s, 0.0)) {
                        return Err(Error::InvalidDomain(format!("boundary loops {i} and {j} intersect")));
                    }
                }
            }
        }
        if let DomainKind::Strip { .. } = self.kind {
            let lower = self.loops[0].poly[0].1;
            let upper = self.loops[1].point_above(lower.x);
            if upper.is_none_or(|v| v <= lower.y) {
                return Err(Error::InvalidDomain("strip upper curve must lie above the lower curve".into()));
            }
        }
        for i in self.outer_count..self.loops.len() {
            let p = self.loops[i].poly[0].1;
            if !self.inside_outer(p) {
                return Err(Error::InvalidDomain(format!("inner boundary loop {i} lies outside the outer region")));
            }
        }
        Ok(())
    }

    fn inside_outer(&self, p: Vec2) -> bool {
        let below = self
            .crossings_with(p.x, |li| li < self.outer_count)
            .into_iter()
            .filter(|&v| v < p.y)
            .count();
        below % 2 == 1
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn period(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Disk => None,
            DomainKind::Strip { period } => Some(period),
        }
    }

    pub fn loops(&self) -> &[BoundaryLoop] {
        &self.loops
    }

    pub fn inner_loop_count(&self) -> usize {
        self.loops.len() - self.outer_count
    }

    /// `χ(M) = χ_base - #inner loops`.
    pub fn euler_characteristic(&self) -> i64 {
        let base = match self.kind {
            DomainKind::Disk => 1,
            DomainKind::Strip { .. } => 0,
        };
        base - self.inner_loop_count() as i64
    }

    /// Bounding box `(u_min, u_max, v_min, v_max)`; for strips the `u` range is one period.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match self.kind {
            DomainKind::Disk => (self.u_min, self.u_max, self.v_min, self.v_max),
            DomainKind::Strip { period } => {
                let u0 = self.loops[0].poly[0].1.x;
                (u0, u0 + period, self.v_min, self.v_max)
            }
        }
    }

    /// Canonical representative of `p` (periodic `u` wrapped into the fundamental interval).
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        match self.kind {
            DomainKind::Disk => p,
            DomainKind::Strip { period } => {
                let u0 = self.loops[0].poly[0].1.x;
                Vec2::new(p.x - period * ((p.x - u0) / period).floor(), p.y)
            }
        }
    }

    /// Difference `b - a` reduced to the nearest periodic copy.
    pub fn delta(&self, a: Vec2, b: Vec2) -> Vec2 {
        let d = b - a;
        match self.kind {
            DomainKind::Disk => d,
            DomainKind::Strip { period } => Vec2::new(d.x - period * (d.x / period).round(), d.y),
        }
    }

    /// Sorted `v` coordinates where the vertical line through `u` meets `∂M`.
    /// Points with `v` strictly between crossings `2k` and `2k+1` lie in `M`.
    pub fn vertical_crossings(&self, u: f64) -> Vec<f64> {
        self.crossings_with(u, |_| true)
    }

    fn crossings_with(&self, u: f64, keep: impl Fn(usize) -> bool) -> Vec<f64> {
        let mut out = Vec::new();
        let queries: Vec<f64> = match self.kind {
            DomainKind::Disk => vec![u],
            DomainKind::Strip { period } => {
                let k0 = ((self.u_min - u) / period).floor() as i64;
                let k1 = ((self.u_max - u) / period).ceil() as i64;
                (k0..=k1).map(|k| u + k as f64 * period).collect()
            }
        };
        for q in queries {
            if q < self.u_min || q > self.u_max {
                continue;
            }
            for seg in &self.buckets[self.bucket(q)] {
                if !keep(seg.loop_index) {
                    continue;
                }
                let l = &self.loops[seg.loop_index];
                let (ta, a) = l.poly[seg.index];
                let (tb, b) = l.poly[seg.index + 1];
                if (a.x <= q) == (b.x <= q) {
                    continue;
                }
                if let Ok(t) = l.solve_u(q, ta, tb) {
                    if let Ok(p) = l.point(t) {
                        out.push(p.y);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Membership test by crossing parity.
    pub fn contains(&self, p: Vec2) -> bool {
        let below = self.vertical_crossings(p.x).into_iter().filter(|&v| v < p.y).count();
        below % 2 == 1
    }

    /// Approximate distance to `∂M` from the boundary polylines.
    pub fn distance_to_boundary(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for l in &self.loops {
            for w in l.poly.windows(2) {
                let a = p - self.delta(w[0].1, p);
                let b = a + (w[1].1 - w[0].1);
                best = best.min(point_segment_distance(p, a, b));
            }
        }
        best
    }
}

impl BoundaryLoop {
    fn point_above(&self, u: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for w in self.poly.windows(2) {
            let (a, b) = (w[0].1, w[1].1);
            if (a.x <= u) != (b.x <= u) {
                let s = (u - a.x) / (b.x - a.x);
                let v = a.y + s * (b.y - a.y);
                best = Some(best.map_or(v, |x: f64| x.min(v)));
            }
        }
        best.or_else(|| Some(self.poly[0].1.y))
    }
}

fn polygon_area(poly: &[(f64, Vec2)]) -> f64 {
    let mut a = 0.0;
    for w in poly.windows(2) {
        a += w[0].1.cross(w[1].1);
    }
    0.5 * a
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    let s = if len2 > 0.0 { ((p - a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + d * s)).norm()
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    (o1 > 0.0) != (o2 > 0.0) && (o3 > 0.0) != (o4 > 0.0) && o1 != 0.0 && o3 != 0.0
}

fn polylines_intersect(p: &[(f64, Vec2)], q: &[(f64, Vec2)], shift: Vec2) -> bool {
    let bbox = |pts: &[(f64, Vec2)], s: Vec2| {
        pts.iter().fold((f64::MAX, f64::MIN, f64::MAX, f64::MIN), |acc, &(_, v)| {
            let v = v + s;
            (acc.0.min(v.x), acc.1.max(v.x), acc.2.min(v.y), acc.3.max(v.y))
        })
    };
    let (a0, a1, a2, a3) = bbox(p, Vec2::ZERO);
    let (b0, b1, b2, b3) = bbox(q, shift);
    if a1 < b0 || b1 < a0 || a3 < b2 || b3 < a2 {
        return false;
    }
    for w in p.windows(2) {
        let (lo_x, hi_x) = (w[0].1.x.min(w[1].1.x), w[0].1.x.max(w[1].1.x));
        for z in q.windows(2) {
            let (c, d) = (z[0].1 + shift, z[1].1 + shift);
            if c.x.max(d.x) < lo_x || c.x.min(d.x) > hi_x {
                continue;
            }
            if segments_intersect(w[0].1, w[1].1, c, d) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus() -> PlanarDomain {
        PlanarDomain::disk(
            BoundaryLoop::circle(0.0, 0.0, 2.0, true),
            vec![BoundaryLoop::circle(0.0, 0.0, 1.0, false)],
        )
        .unwrap()
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(PlanarDomain::unit_disk().euler_characteristic(), 1);
        assert_eq!(annulus().euler_characteristic(), 0);
        assert_eq!(PlanarDomain::flat_strip(1.0, 0.0, 1.0).unwrap().euler_characteristic(), 0);
    }

    #[test]
    fn membership() {
        let a = annulus();
        assert!(a.contains(Vec2::new(1.5, 0.0)));
        assert!(a.contains(Vec2::new(0.0, -1.9)));
        assert!(!a.contains(Vec2::new(0.5, 0.2)));
        assert!(!a.contains(Vec2::new(2.5, 0.0)));
        let c = a.vertical_crossings(0.5);
        assert_eq!(c.len(), 4);
        let expect = [-(4.0f64 - 0.25).sqrt(), -(0.75f64).sqrt(), 0.75f64.sqrt(), 3.75f64.sqrt()];
        for (x, y) in c.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        let s = PlanarDomain::flat_strip(2.0, 0.0, 1.0).unwrap();
        assert!(s.contains(Vec2::new(0.3, 0.5)));
        assert!(s.contains(Vec2::new(5.3, 0.5)));
        assert!(!s.contains(Vec2::new(-3.7, 1.5)));
        assert_eq!(s.vertical_crossings(-3.7), vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_layouts() {
        let cw = PlanarDomain::disk(BoundaryLoop::circle(0.0, 0.0, 1.0, false), vec![]);
        assert!(matches!(cw, Err(Error::InvalidDomain(_))));
        let crossing = PlanarDomain::disk(
            BoundaryLoop::circle(0.0, 0.0, 1.0, true),
            vec![BoundaryLoop::circle(0.9, 0.0, 0.5, false)],
        );
        assert!(matches!(crossing, Err(Error::InvalidDomain(_))));
        let outside = PlanarDomain::disk(
            BoundaryLoop::circle(0.0, 0.0, 1.0, true),
            vec![BoundaryLoop::circle(3.0, 0.0, 0.5, false)],
        );
        assert!(matches!(outside, Err(Error::InvalidDomain(_))));
        let open = BoundaryLoop::from_strings("cos(t)", "sin(t)", 0.0, 3.0).unwrap();
        assert!(PlanarDomain::disk(open, vec![]).is_err());
        let stalled = BoundaryLoop::from_strings("cos(t)^3", "sin(t)^3", 0.0, std::f64::consts::TAU).unwrap();
        assert!(PlanarDomain::disk(stalled, vec![]).is_err());
    }

    #[test]
    fn distances_and_wrapping() {
        let d = PlanarDomain::unit_disk();
        assert!((d.distance_to_boundary(Vec2::new(0.5, 0.0)) - 0.5).abs() < 1e-4);
        let s = PlanarDomain::flat_strip(2.0, 0.0, 1.0).unwrap();
        assert_eq!(s.wrap(Vec2::new(5.5, 0.2)), Vec2::new(1.5, 0.2));
        assert!((s.delta(Vec2::new(1.9, 0.0), Vec2::new(0.1, 0.0)).x - 0.2).abs() < 1e-12);
        assert!((s.distance_to_boundary(Vec2::new(7.0, 0.3)) - 0.3).abs() < 1e-12);
    }
}

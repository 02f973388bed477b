use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mapcore::{DomainKind, PlanarDomain, SurfaceMap};
use crate::singular::{tangent, SecondKindPoint, SingularSet, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VertexKind {
    /// A point of `Σ ∩ ∂M`, by crossing index.
    Crossing(usize),
    /// An interior second-kind point, by index into the second-kind list.
    SecondKind(usize),
    /// Base point of a closed curve that carries no other vertex.
    Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    Singular,
    Boundary,
}

#[derive(Debug, Clone, Serialize)]
pub struct Vertex {
    pub point: Vec2,
    pub kind: VertexKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub from: usize,
    pub to: usize,
    /// Points on the curve from `from` to `to`, both ends included.
    pub points: Vec<Vec2>,
    /// Face on the left of the traversal `from -> to`.
    pub left: Option<usize>,
    /// Face on the right; `None` outside `M`.
    pub right: Option<usize>,
    /// A closed curve without vertices other than its base point.
    pub free: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Face {
    /// `sgn λ` on the face.
    pub sign: i8,
    /// `χ` of the open face: `1 - #holes`.
    pub euler: i64,
    /// Number of boundary cycles.
    pub cycles: usize,
    pub sample: Vec2,
}

/// Cell structure of `M` cut along `Σ`.
#[derive(Debug, Clone, Serialize)]
pub struct RegionDecomposition {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
    pub domain_euler: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EulerSelector {
    M,
    ClosurePlus,
    ClosureMinus,
    Sigma,
    /// `M+ = {λ > 0}`, including its part of `∂M`.
    OpenPlus,
    OpenMinus,
}

/// Summary counts; base points and free loops are not counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecompositionCounts {
    pub vertices: usize,
    pub edges: usize,
    pub singular_edges: usize,
    pub boundary_edges: usize,
    pub faces: usize,
    pub free_singular_loops: usize,
    pub free_boundary_loops: usize,
}

impl RegionDecomposition {
    pub fn counts(&self) -> DecompositionCounts {
        let real = |e: &&Edge| !e.free;
        DecompositionCounts {
            vertices: self.vertices.iter().filter(|v| v.kind != VertexKind::Base).count(),
            edges: self.edges.iter().filter(real).count(),
            singular_edges: self.edges.iter().filter(real).filter(|e| e.kind == EdgeKind::Singular).count(),
            boundary_edges: self.edges.iter().filter(real).filter(|e| e.kind == EdgeKind::Boundary).count(),
            faces: self.faces.len(),
            free_singular_loops: self.edges.iter().filter(|e| e.free && e.kind == EdgeKind::Singular).count(),
            free_boundary_loops: self.edges.iter().filter(|e| e.free && e.kind == EdgeKind::Boundary).count(),
        }
    }

    /// `#(Σ ∩ ∂M)`.
    pub fn crossing_count(&self) -> usize {
        self.vertices.iter().filter(|v| matches!(v.kind, VertexKind::Crossing(_))).count()
    }

    fn face_sign(&self, f: Option<usize>) -> Option<i8> {
        f.map(|i| self.faces[i].sign)
    }

    /// Euler characteristic of the selected subset, as an alternating count of
    /// its open cells (faces contribute their own `χ`).
    pub fn euler_characteristic(&self, selector: EulerSelector) -> i64 {
        let faces = |s: i8| self.faces.iter().filter(|f| f.sign == s).map(|f| f.euler).sum::<i64>();
        match selector {
            EulerSelector::M => {
                let c = self.counts();
                c.vertices as i64 - c.edges as i64 + self.faces.iter().map(|f| f.euler).sum::<i64>()
            }
            EulerSelector::Sigma => {
                let c = self.counts();
                c.vertices as i64 - c.singular_edges as i64
            }
            EulerSelector::OpenPlus | EulerSelector::OpenMinus => {
                let s = if selector == EulerSelector::OpenPlus { 1 } else { -1 };
                let edges = self
                    .edges
                    .iter()
                    .filter(|e| !e.free && e.kind == EdgeKind::Boundary && self.face_sign(e.left) == Some(s))
                    .count();
                faces(s) - edges as i64
            }
            EulerSelector::ClosurePlus | EulerSelector::ClosureMinus => {
                let s = if selector == EulerSelector::ClosurePlus { 1 } else { -1 };
                let mut vertex = vec![false; self.vertices.len()];
                let mut edges = 0i64;
                for e in &self.edges {
                    if self.face_sign(e.left) == Some(s) || self.face_sign(e.right) == Some(s) {
                        edges += 1;
                        vertex[e.from] = true;
                        vertex[e.to] = true;
                    }
                }
                faces(s) - edges + vertex.iter().filter(|&&v| v).count() as i64
            }
        }
    }
}

/// Orientation-preserving conformal embedding of `M` into the plane; strips
/// are wrapped onto an annulus so every face boundary is a closed plane curve.
fn planar(dom: &PlanarDomain, p: Vec2) -> Vec2 {
    match dom.kind() {
        DomainKind::Disk => p,
        DomainKind::Strip { period } => {
            let k = TAU / period;
            Vec2::from_angle(k * p.x) * (-k * p.y).exp()
        }
    }
}

fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>()
}

fn winding_contains(poly: &[Vec2], q: Vec2) -> bool {
    let mut total = 0.0;
    let n = poly.len();
    for i in 0..n {
        total += crate::geom::turn_angle(poly[i] - q, poly[(i + 1) % n] - q);
    }
    total.abs() > std::f64::consts::PI
}

struct Builder<'a> {
    map: &'a SurfaceMap,
    dom: &'a PlanarDomain,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    /// Unit directions leaving `from` and arriving at `to`.
    dirs: Vec<(Vec2, Vec2)>,
}

impl Builder<'_> {
    fn push(&mut self, kind: EdgeKind, from: usize, to: usize, points: Vec<Vec2>, out: Vec2, arrive: Vec2, free: bool) {
        self.edges.push(Edge { kind, from, to, points, left: None, right: None, free });
        self.dirs.push((out.normalized(), arrive.normalized()));
    }

    fn base(&mut self, point: Vec2) -> usize {
        self.vertices.push(Vertex { point, kind: VertexKind::Base });
        self.vertices.len() - 1
    }

    /// Unit tangent of `Σ` at `p` oriented along `toward - p`.
    fn sigma_dir(&self, p: Vec2, toward: Vec2) -> Result<Vec2> {
        let (t, _) = tangent(self.map, p)?;
        Ok(if t.dot(self.dom.delta(p, toward)) >= 0.0 { t } else { -t })
    }

    fn boundary_edges(&mut self, set: &SingularSet) -> Result<()> {
        for (li, lp) in self.dom.loops().iter().enumerate() {
            let (t0, t1) = lp.range();
            let poly = lp.polyline();
            let mut cuts: Vec<(f64, usize)> =
                set.crossings.iter().enumerate().filter(|(_, c)| c.loop_index == li).map(|(i, c)| (c.t, i)).collect();
            cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if cuts.is_empty() {
                let v = self.base(lp.point(t0)?);
                let pts: Vec<Vec2> = poly.iter().map(|&(_, p)| p).collect();
                let d = lp.velocity(t0)?;
                self.push(EdgeKind::Boundary, v, v, pts, d, d, true);
                continue;
            }
            for k in 0..cuts.len() {
                let (ta, va) = cuts[k];
                let (tb, vb) = cuts[(k + 1) % cuts.len()];
                let mut pts = vec![lp.point(ta)?];
                if k + 1 < cuts.len() {
                    pts.extend(poly.iter().filter(|(t, _)| *t > ta && *t < tb).map(|&(_, p)| p));
                } else {
                    pts.extend(poly.iter().filter(|(t, _)| *t > ta && *t < t1).map(|&(_, p)| p));
                    pts.extend(poly.iter().filter(|(t, _)| *t >= t0 && *t < tb).map(|&(_, p)| p));
                }
                pts.push(lp.point(tb)?);
                let (da, db) = (lp.velocity(ta)?, lp.velocity(tb)?);
                self.push(EdgeKind::Boundary, va, vb, pts, da, db, false);
            }
        }
        Ok(())
    }

    fn singular_edges(&mut self, set: &SingularSet, second_kind: &[SecondKindPoint], base_index: usize) -> Result<()> {
        for (ci, comp) in set.components.iter().enumerate() {
            let mut breaks: Vec<(f64, usize)> = second_kind
                .iter()
                .enumerate()
                .filter(|(_, s)| s.component == ci)
                .map(|(j, s)| (s.sigma, base_index + j))
                .collect();
            breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
            let samples = |a: f64, b: f64| comp.samples.iter().filter(move |s| s.sigma > a && s.sigma < b).map(|s| s.point);
            match comp.topology {
                Topology::Arc => {
                    let (Some(start), Some(end)) = (comp.start, comp.end) else {
                        return Err(Error::InconsistentDecomposition("singular arc without end crossings".into()));
                    };
                    let mut stops = vec![(0.0, start)];
                    stops.extend(breaks.iter().copied());
                    stops.push((comp.length, end));
                    for w in stops.windows(2) {
                        let (pa, pb) = (comp.point_at(self.map, w[0].0)?, comp.point_at(self.map, w[1].0)?);
                        let mut pts = vec![pa];
                        pts.extend(samples(w[0].0, w[1].0));
                        pts.push(pb);
                        let out = self.sigma_dir(pa, pts[1])?;
                        let arrive = -self.sigma_dir(pb, pts[pts.len() - 2])?;
                        self.push(EdgeKind::Singular, w[0].1, w[1].1, pts, out, arrive, false);
                    }
                }
                Topology::Closed => {
                    let free = breaks.is_empty();
                    if free {
                        let p = comp.samples[0].point;
                        breaks.push((0.0, self.base(p)));
                    }
                    for k in 0..breaks.len() {
                        let (sa, va) = breaks[k];
                        let (mut sb, vb) = breaks[(k + 1) % breaks.len()];
                        if k + 1 == breaks.len() {
                            sb += comp.length;
                        }
                        let (pa, pb) = (comp.point_at(self.map, sa)?, comp.point_at(self.map, sb)?);
                        let mut pts = vec![pa];
                        if sb <= comp.length {
                            pts.extend(samples(sa, sb));
                        } else {
                            pts.extend(samples(sa, comp.length + 1.0));
                            pts.extend(samples(-1.0, sb - comp.length));
                        }
                        pts.push(pb);
                        if pts.len() < 3 {
                            return Err(Error::InconsistentDecomposition("singular edge too short to resolve".into()));
                        }
                        let out = self.sigma_dir(pa, pts[1])?;
                        let arrive = -self.sigma_dir(pb, pts[pts.len() - 2])?;
                        self.push(EdgeKind::Singular, va, vb, pts, out, arrive, free);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Cut `M` along `Σ` into faces and tag each face with the sign of `λ`.
pub fn build_decomposition(
    map: &SurfaceMap,
    dom: &PlanarDomain,
    set: &SingularSet,
    second_kind: &[SecondKindPoint],
) -> Result<RegionDecomposition> {
    let mut b = Builder { map, dom, vertices: Vec::new(), edges: Vec::new(), dirs: Vec::new() };
    for (i, c) in set.crossings.iter().enumerate() {
        b.vertices.push(Vertex { point: c.point, kind: VertexKind::Crossing(i) });
    }
    let base_index = b.vertices.len();
    for (j, s) in second_kind.iter().enumerate() {
        b.vertices.push(Vertex { point: s.point, kind: VertexKind::SecondKind(j) });
    }
    b.boundary_edges(set)?;
    b.singular_edges(set, second_kind, base_index)?;
    let Builder { mut vertices, mut edges, dirs, .. } = b;

    // Half-edge 2e runs from -> to, 2e+1 runs back.
    let nh = 2 * edges.len();
    let origin = |h: usize| if h.is_multiple_of(2) { edges[h / 2].from } else { edges[h / 2].to };
    let out_dir = |h: usize| if h.is_multiple_of(2) { dirs[h / 2].0 } else { -dirs[h / 2].1 };
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for h in 0..nh {
        around[origin(h)].push(h);
    }
    for list in &mut around {
        list.sort_by(|&a, &b| out_dir(a).angle().total_cmp(&out_dir(b).angle()));
    }
    for (v, list) in around.iter().enumerate() {
        let expected = match vertices[v].kind {
            VertexKind::Crossing(_) => 3,
            VertexKind::SecondKind(_) | VertexKind::Base => 2,
        };
        if list.len() != expected {
            return Err(Error::InconsistentDecomposition(format!(
                "vertex at ({:.6}, {:.6}) has degree {} instead of {expected}",
                vertices[v].point.x,
                vertices[v].point.y,
                list.len()
            )));
        }
    }
    let next = |h: usize| {
        let twin = h ^ 1;
        let list = &around[origin(twin)];
        let i = list.iter().position(|&x| x == twin).expect("twin leaves its origin");
        list[(i + list.len() - 1) % list.len()]
    };
    let exterior = |h: usize| h % 2 == 1 && edges[h / 2].kind == EdgeKind::Boundary;

    let mut cycle_of = vec![usize::MAX; nh];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for h in 0..nh {
        if cycle_of[h] != usize::MAX {
            continue;
        }
        let mut c = Vec::new();
        let mut x = h;
        while cycle_of[x] == usize::MAX {
            cycle_of[x] = cycles.len();
            c.push(x);
            x = next(x);
        }
        cycles.push(c);
    }
    let half_points = |h: usize| -> Vec<Vec2> {
        let e = &edges[h / 2];
        let mut p = e.points[..e.points.len() - 1].to_vec();
        if h % 2 == 1 {
            p = e.points[1..].to_vec();
            p.reverse();
        }
        p
    };
    let interior: Vec<usize> = (0..cycles.len()).filter(|&c| !cycles[c].iter().any(|&h| exterior(h))).collect();
    if interior.iter().any(|&c| cycles[c].iter().any(|&h| exterior(h))) {
        return Err(Error::InconsistentDecomposition("face boundary mixes sides of the boundary".into()));
    }
    let plane: Vec<Vec<Vec2>> = interior
        .iter()
        .map(|&c| cycles[c].iter().flat_map(|&h| half_points(h)).map(|p| planar(dom, p)).collect())
        .collect();
    let areas: Vec<f64> = plane.iter().map(|p| signed_area(p)).collect();
    let outer: Vec<usize> = (0..interior.len()).filter(|&i| areas[i] > 0.0).collect();
    let mut face_of_cycle = vec![usize::MAX; cycles.len()];
    let mut holes = vec![0i64; outer.len()];
    let mut members: Vec<Vec<usize>> = outer.iter().map(|&i| vec![interior[i]]).collect();
    for (f, &i) in outer.iter().enumerate() {
        face_of_cycle[interior[i]] = f;
    }
    for i in (0..interior.len()).filter(|&i| areas[i] <= 0.0) {
        let first = half_points(cycles[interior[i]][0]);
        let q = planar(dom, first[first.len() / 2]);
        // Faces across the hole's own edges touch `q` and lie on the wrong side.
        let across: Vec<usize> = cycles[interior[i]].iter().map(|&h| cycle_of[h ^ 1]).collect();
        let host = outer
            .iter()
            .enumerate()
            .filter(|(_, &o)| !across.contains(&interior[o]) && winding_contains(&plane[o], q))
            .min_by(|a, b| areas[*a.1].total_cmp(&areas[*b.1]))
            .map(|(f, _)| f)
            .ok_or_else(|| Error::InconsistentDecomposition("hole cycle outside every face".into()))?;
        face_of_cycle[interior[i]] = host;
        holes[host] += 1;
        members[host].push(interior[i]);
    }

    let extent = {
        let (u0, u1, v0, v1) = dom.bounds();
        (u1 - u0).max(v1 - v0)
    };
    let eps = 1e-5 * extent;
    let mut faces = Vec::new();
    for (f, cyc) in members.iter().enumerate() {
        let mut sign = 0i8;
        let mut sample = Vec2::ZERO;
        for &c in cyc {
            for &h in &cycles[c] {
                let e = &edges[h / 2];
                let n = e.points.len();
                let stride = (n / 4).max(1);
                for i in (1..n.saturating_sub(1)).step_by(stride) {
                    // Near a vertex the offset point may fall across the other edge.
                    let (p0, p1) = (e.points[0], e.points[n - 1]);
                    if dom.delta(p0, e.points[i]).norm().min(dom.delta(p1, e.points[i]).norm()) < 10.0 * eps {
                        continue;
                    }
                    let d = dom.delta(e.points[i - 1], e.points[i + 1]);
                    let d = if h.is_multiple_of(2) { d } else { -d };
                    let q = e.points[i] + d.normalized().perp() * eps;
                    let l = map.lambda_unchecked(q)?;
                    if l.abs() < 1e-14 {
                        continue;
                    }
                    let s: i8 = if l > 0.0 { 1 } else { -1 };
                    if sign == 0 {
                        sign = s;
                        sample = q;
                    } else if sign != s {
                        return Err(Error::InconsistentDecomposition(format!(
                            "face near ({:.4}, {:.4}) samples both signs of lambda",
                            q.x, q.y
                        )));
                    }
                }
            }
        }
        if sign == 0 {
            return Err(Error::InconsistentDecomposition("could not sample the sign of a face".into()));
        }
        faces.push(Face { sign, euler: 1 - holes[f], cycles: cyc.len(), sample });
    }
    for (e, edge) in edges.iter_mut().enumerate() {
        let side = |h: usize| {
            let c = cycle_of[h];
            (face_of_cycle[c] != usize::MAX).then(|| face_of_cycle[c])
        };
        edge.left = side(2 * e);
        edge.right = if edge.kind == EdgeKind::Boundary { None } else { side(2 * e + 1) };
    }
    vertices.shrink_to_fit();
    let dec = RegionDecomposition { vertices, edges, faces, domain_euler: dom.euler_characteristic() };
    dec.check()?;
    Ok(dec)
}

impl RegionDecomposition {
    fn check(&self) -> Result<()> {
        for e in &self.edges {
            if e.left.is_none() {
                return Err(Error::InconsistentDecomposition("edge without a face on its interior side".into()));
            }
            if e.kind == EdgeKind::Singular {
                let (Some(a), Some(b)) = (e.left, e.right) else {
                    return Err(Error::InconsistentDecomposition("singular edge missing a face".into()));
                };
                if self.faces[a].sign == self.faces[b].sign {
                    return Err(Error::InconsistentDecomposition(format!(
                        "faces across the singular edge at ({:.4}, {:.4}) have the same sign",
                        e.points[e.points.len() / 2].x,
                        e.points[e.points.len() / 2].y
                    )));
                }
            }
        }
        let chi = self.euler_characteristic(EulerSelector::M);
        if chi != self.domain_euler {
            return Err(Error::InconsistentDecomposition(format!(
                "V - E + F = {chi} but the domain has Euler characteristic {}",
                self.domain_euler
            )));
        }
        Ok(())
    }
}

//! The target surface: one coordinate chart `(x, y)` carrying a Riemannian
//! metric `E dx^2 + 2F dx dy + G dy^2`.
//!
//! All curvature data is assembled from exact symbolic partials of `E, F, G`.
//! The positive orthonormal frame is fixed as `e1 = dx / sqrt(E)` with `e2`
//! obtained by Gram-Schmidt, so frame angles are reproducible.

use crate::error::{Error, Result};
use crate::expr::{Expr, Tape, Vars};
use crate::geom::Vec2;

/// Where the chart is valid.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartRegion {
    /// Closed rectangle; infinite bounds are allowed.
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { cx: f64, cy: f64, r: f64 },
}

impl ChartRegion {
    pub fn everywhere() -> Self {
        ChartRegion::Rect {
            x0: f64::NEG_INFINITY,
            x1: f64::INFINITY,
            y0: f64::NEG_INFINITY,
            y1: f64::INFINITY,
        }
    }

    fn contains(&self, q: Vec2, ignore_x: bool) -> bool {
        match *self {
            ChartRegion::Rect { x0, x1, y0, y1 } => {
                (ignore_x || (q.x >= x0 && q.x <= x1)) && q.y >= y0 && q.y <= y1
            }
            ChartRegion::Disk { cx, cy, r } => (q - Vec2::new(cx, cy)).norm() <= r,
        }
    }

    /// Finite sample points for validating chart data.
    fn samples(&self, n: usize) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(n * n);
        match *self {
            ChartRegion::Rect { x0, x1, y0, y1 } => {
                let clamp = |a: f64, b: f64| -> (f64, f64) {
                    match (a.is_finite(), b.is_finite()) {
                        (true, true) => (a, b),
                        (true, false) => (a, a + 4.0),
                        (false, true) => (b - 4.0, b),
                        (false, false) => (-2.0, 2.0),
                    }
                };
                let (x0, x1) = clamp(x0, x1);
                let (y0, y1) = clamp(y0, y1);
                for i in 0..n {
                    for j in 0..n {
                        let s = (i as f64 + 0.5) / n as f64;
                        let t = (j as f64 + 0.5) / n as f64;
                        out.push(Vec2::new(x0 + s * (x1 - x0), y0 + t * (y1 - y0)));
                    }
                }
            }
            ChartRegion::Disk { cx, cy, r } => {
                for i in 0..n {
                    for j in 0..n {
                        let rho = r * ((i as f64 + 0.5) / n as f64).sqrt();
                        let th = std::f64::consts::TAU * (j as f64 + 0.37 * i as f64) / n as f64;
                        out.push(Vec2::new(cx + rho * th.cos(), cy + rho * th.sin()));
                    }
                }
            }
        }
        out
    }
}

/// Christoffel symbols `Γ^k_ij` of the Levi-Civita connection, symmetric in `i, j`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Christoffel {
    pub g1_11: f64,
    pub g1_12: f64,
    pub g1_22: f64,
    pub g2_11: f64,
    pub g2_12: f64,
    pub g2_22: f64,
}

impl Christoffel {
    /// `Γ^k_ij a^i b^j` as a vector indexed by `k`.
    pub fn contract(&self, a: Vec2, b: Vec2) -> Vec2 {
        let mixed = a.x * b.y + a.y * b.x;
        Vec2::new(
            self.g1_11 * a.x * b.x + self.g1_12 * mixed + self.g1_22 * a.y * b.y,
            self.g2_11 * a.x * b.x + self.g2_12 * mixed + self.g2_22 * a.y * b.y,
        )
    }
}

/// Metric components and their partials up to second order at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricJet {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub e_x: f64,
    pub e_y: f64,
    pub f_x: f64,
    pub f_y: f64,
    pub g_x: f64,
    pub g_y: f64,
    pub e_yy: f64,
    pub f_xy: f64,
    pub g_xx: f64,
}

impl MetricJet {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// Levi-Civita coefficients from the first partials.
    pub fn christoffel(&self) -> Christoffel {
        let d2 = 2.0 * self.det();
        let (e, f, g) = (self.e, self.f, self.g);
        Christoffel {
            g1_11: (g * self.e_x - 2.0 * f * self.f_x + f * self.e_y) / d2,
            g2_11: (2.0 * e * self.f_x - e * self.e_y - f * self.e_x) / d2,
            g1_12: (g * self.e_y - f * self.g_x) / d2,
            g2_12: (e * self.g_x - f * self.e_y) / d2,
            g1_22: (2.0 * g * self.f_y - g * self.g_x - f * self.g_y) / d2,
            g2_22: (e * self.g_y - 2.0 * f * self.f_y + f * self.g_x) / d2,
        }
    }

    /// Gaussian curvature by the Brioschi formula.
    pub fn brioschi(&self) -> f64 {
        let (e, f, g) = (self.e, self.f, self.g);
        let det3 = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let m1 = [
            [
                -0.5 * self.e_yy + self.f_xy - 0.5 * self.g_xx,
                0.5 * self.e_x,
                self.f_x - 0.5 * self.e_y,
            ],
            [self.f_y - 0.5 * self.g_x, e, f],
            [0.5 * self.g_y, f, g],
        ];
        let m2 = [
            [0.0, 0.5 * self.e_y, 0.5 * self.g_x],
            [0.5 * self.e_y, e, f],
            [0.5 * self.g_x, f, g],
        ];
        let d = self.det();
        (det3(m1) - det3(m2)) / (d * d)
    }

    pub fn inner(&self, a: Vec2, b: Vec2) -> f64 {
        self.e * a.x * b.x + self.f * (a.x * b.y + a.y * b.x) + self.g * a.y * b.y
    }

    pub fn norm(&self, a: Vec2) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// `dA(a, b)`: the area form evaluated on two vectors.
    pub fn area(&self, a: Vec2, b: Vec2) -> f64 {
        self.det().sqrt() * a.cross(b)
    }

    /// Angle of `v` measured in the fixed positive orthonormal frame.
    pub fn frame_angle(&self, v: Vec2) -> f64 {
        let se = self.e.sqrt();
        let c1 = (self.e * v.x + self.f * v.y) / se;
        let c2 = self.det().sqrt() * v.y / se;
        c2.atan2(c1)
    }

    /// Connection form of the fixed frame: `<D_X e1, e2>`.
    pub fn connection_form(&self, x: Vec2) -> f64 {
        let se = self.e.sqrt();
        let e1 = Vec2::new(1.0 / se, 0.0);
        let de = self.e_x * x.x + self.e_y * x.y;
        let de1 = Vec2::new(-0.5 * de / (self.e * se), 0.0);
        let cov = de1 + self.christoffel().contract(x, e1);
        self.det().sqrt() * cov.y / se
    }
}

#[derive(Debug, Clone)]
struct Components {
    value: Tape,
    dx: Tape,
    dy: Tape,
    dxx: Tape,
    dxy: Tape,
    dyy: Tape,
}

impl Components {
    fn new(e: &Expr) -> Self {
        let dx = e.differentiate(0);
        let dy = e.differentiate(1);
        Components {
            value: Tape::new(e),
            dxx: Tape::new(&dx.differentiate(0)),
            dxy: Tape::new(&dx.differentiate(1)),
            dyy: Tape::new(&dy.differentiate(1)),
            dx: Tape::new(&dx),
            dy: Tape::new(&dy),
        }
    }

    fn first_order_constant(&self) -> bool {
        self.dx.is_const() == Some(0.0) && self.dy.is_const() == Some(0.0)
    }
}

/// Target chart with metric `E, F, G` in coordinates `(x, y)`.
#[derive(Debug, Clone)]
pub struct MetricChart {
    vars: Vars,
    e: Components,
    f: Components,
    g: Components,
    exprs: [Expr; 3],
    curvature: Option<Tape>,
    region: ChartRegion,
    period: Option<f64>,
    flat: bool,
}

impl MetricChart {
    /// Variables of the target chart: `x, y`.
    pub fn vars() -> Vars {
        Vars::new(&["x", "y"])
    }

    /// Build and validate a chart. `curvature` is an optional user-supplied
    /// `K_N`, checked against the Brioschi computation.
    pub fn new(
        e: Expr,
        f: Expr,
        g: Expr,
        region: ChartRegion,
        period: Option<f64>,
        curvature: Option<Expr>,
    ) -> Result<Self> {
        let chart = MetricChart {
            vars: Self::vars(),
            e: Components::new(&e),
            f: Components::new(&f),
            g: Components::new(&g),
            flat: false,
            exprs: [e, f, g],
            curvature: curvature.as_ref().map(Tape::new),
            region,
            period,
        };
        let flat = chart.e.first_order_constant()
            && chart.f.first_order_constant()
            && chart.g.first_order_constant();
        let chart = MetricChart { flat, ..chart };
        chart.validate()?;
        Ok(chart)
    }

    /// The Euclidean plane.
    pub fn flat() -> Self {
        Self::new(Expr::one(), Expr::zero(), Expr::one(), ChartRegion::everywhere(), None, None)
            .expect("flat chart is valid")
    }

    pub fn from_strings(
        e: &str,
        f: &str,
        g: &str,
        region: ChartRegion,
        period: Option<f64>,
        curvature: Option<&str>,
    ) -> Result<Self> {
        let vars = Self::vars();
        let parse = |s: &str| crate::expr::parse(s, &vars);
        Self::new(
            parse(e)?,
            parse(f)?,
            parse(g)?,
            region,
            period,
            curvature.map(parse).transpose()?,
        )
    }

    fn validate(&self) -> Result<()> {
        for q in self.region.samples(10) {
            let m = self.jet(q)?;
            if !(m.e > 0.0 && m.g > 0.0) {
                return Err(Error::MetricDegenerate { x: q.x, y: q.y, det: m.det() });
            }
        }
        if let Some(k) = &self.curvature {
            for q in self.region.samples(10) {
                let supplied = k.eval(&[q.x, q.y])?;
                let computed = self.gaussian_curvature(q)?;
                if (supplied - computed).abs() > 1e-6 {
                    return Err(Error::CurvatureMismatch { x: q.x, y: q.y, supplied, computed });
                }
            }
        }
        Ok(())
    }

    pub fn components(&self) -> &[Expr; 3] {
        &self.exprs
    }

    pub fn variables(&self) -> &Vars {
        &self.vars
    }

    pub fn region(&self) -> &ChartRegion {
        &self.region
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    /// True when `E, F, G` are constant, so `K_N` and all Christoffel symbols vanish.
    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn contains(&self, q: Vec2) -> bool {
        self.region.contains(q, self.period.is_some())
    }

    fn check(&self, q: Vec2) -> Result<()> {
        if q.is_finite() && self.contains(q) {
            Ok(())
        } else {
            Err(Error::ChartExit { x: q.x, y: q.y })
        }
    }

    /// Full metric jet at `q`; fails outside the chart or where `EG - F^2 <= 0`.
    pub fn jet(&self, q: Vec2) -> Result<MetricJet> {
        self.check(q)?;
        let p = [q.x, q.y];
        let m = MetricJet {
            e: self.e.value.eval(&p)?,
            f: self.f.value.eval(&p)?,
            g: self.g.value.eval(&p)?,
            e_x: self.e.dx.eval(&p)?,
            e_y: self.e.dy.eval(&p)?,
            f_x: self.f.dx.eval(&p)?,
            f_y: self.f.dy.eval(&p)?,
            g_x: self.g.dx.eval(&p)?,
            g_y: self.g.dy.eval(&p)?,
            e_yy: self.e.dyy.eval(&p)?,
            f_xy: self.f.dxy.eval(&p)?,
            g_xx: self.g.dxx.eval(&p)?,
        };
        if !(m.det() > 0.0) {
            return Err(Error::MetricDegenerate { x: q.x, y: q.y, det: m.det() });
        }
        Ok(m)
    }

    /// `sqrt(EG - F^2)` at `q`.
    pub fn area_density(&self, q: Vec2) -> Result<f64> {
        self.check(q)?;
        let p = [q.x, q.y];
        let (e, f, g) = (self.e.value.eval(&p)?, self.f.value.eval(&p)?, self.g.value.eval(&p)?);
        let det = e * g - f * f;
        if !(det > 0.0) {
            return Err(Error::MetricDegenerate { x: q.x, y: q.y, det });
        }
        Ok(det.sqrt())
    }

    pub fn gaussian_curvature(&self, q: Vec2) -> Result<f64> {
        if self.flat {
            self.check(q)?;
            return Ok(0.0);
        }
        Ok(self.jet(q)?.brioschi())
    }

    pub fn christoffel(&self, q: Vec2) -> Result<Christoffel> {
        if self.flat {
            self.check(q)?;
            return Ok(Christoffel::default());
        }
        Ok(self.jet(q)?.christoffel())
    }

    /// `(D_t X)^k = dX^k/dt + Γ^k_ij velocity^i X^j`.
    pub fn covariant_derivative(
        &self,
        q: Vec2,
        velocity: Vec2,
        x: Vec2,
        dx_dt: Vec2,
    ) -> Result<Vec2> {
        Ok(dx_dt + self.christoffel(q)?.contract(velocity, x))
    }

    /// Signed geodesic curvature (per unit metric arclength) of a curve with
    /// the given position, velocity and coordinate acceleration.
    pub fn image_geodesic_curvature(&self, position: Vec2, velocity: Vec2, accel: Vec2) -> Result<f64> {
        let m = self.jet(position)?;
        let speed = m.norm(velocity);
        if speed < 1e-14 {
            return Err(Error::ZeroVelocity);
        }
        let cov = accel + m.christoffel().contract(velocity, velocity);
        Ok(m.area(velocity, cov) / (speed * speed * speed))
    }

    /// Wrap the periodic coordinate into its fundamental interval around `reference`.
    pub fn wrap_near(&self, q: Vec2, reference: f64) -> Vec2 {
        match self.period {
            Some(p) => {
                let k = ((q.x - reference) / p).round();
                Vec2::new(q.x - k * p, q.y)
            }
            None => q,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> MetricChart {
        MetricChart::from_strings(
            "4/(1+x^2+y^2)^2",
            "0",
            "4/(1+x^2+y^2)^2",
            ChartRegion::Disk { cx: 0.0, cy: 0.0, r: 3.0 },
            None,
            Some("1"),
        )
        .unwrap()
    }

    fn hyperbolic() -> MetricChart {
        MetricChart::from_strings(
            "1/y^2",
            "0",
            "1/y^2",
            ChartRegion::Rect { x0: -10.0, x1: 10.0, y0: 0.05, y1: 10.0 },
            None,
            Some("-1"),
        )
        .unwrap()
    }

    #[test]
    fn area_density_examples() {
        assert_eq!(MetricChart::flat().area_density(Vec2::new(3.0, -2.0)).unwrap(), 1.0);
        assert!((sphere().area_density(Vec2::ZERO).unwrap() - 4.0).abs() < 1e-15);
        let bad = MetricChart::from_strings("1", "1", "1", ChartRegion::everywhere(), None, None);
        assert!(matches!(bad, Err(Error::MetricDegenerate { .. })));
    }

    #[test]
    fn wrong_supplied_curvature_is_rejected() {
        let r = MetricChart::from_strings(
            "1/y^2",
            "0",
            "1/y^2",
            ChartRegion::Rect { x0: -1.0, x1: 1.0, y0: 0.5, y1: 2.0 },
            None,
            Some("1"),
        );
        assert!(matches!(r, Err(Error::CurvatureMismatch { .. })));
    }

    #[test]
    fn flat_chart_is_trivial() {
        let c = MetricChart::flat();
        assert!(c.is_flat());
        let q = Vec2::new(0.3, 0.7);
        assert_eq!(c.gaussian_curvature(q).unwrap(), 0.0);
        assert_eq!(c.christoffel(q).unwrap(), Christoffel::default());
        let dx = Vec2::new(0.2, -1.0);
        assert_eq!(c.covariant_derivative(q, Vec2::new(1.0, 2.0), Vec2::new(3.0, 4.0), dx).unwrap(), dx);
    }

    #[test]
    fn upper_half_plane_christoffel() {
        let g = hyperbolic().christoffel(Vec2::new(0.0, 2.0)).unwrap();
        assert!((g.g1_12 + 0.5).abs() < 1e-14);
        assert!((g.g2_11 - 0.5).abs() < 1e-14);
        assert!((g.g2_22 + 0.5).abs() < 1e-14);
        assert_eq!(g.g1_11, 0.0);
    }

    #[test]
    fn geodesic_curvature_of_circles() {
        let c = MetricChart::flat();
        let r = 2.5;
        let t: f64 = 0.4;
        let pos = Vec2::new(r * t.cos(), r * t.sin());
        let vel = Vec2::new(-r * t.sin(), r * t.cos());
        let acc = Vec2::new(-r * t.cos(), -r * t.sin());
        assert!((c.image_geodesic_curvature(pos, vel, acc).unwrap() - 1.0 / r).abs() < 1e-14);
        assert!((c.image_geodesic_curvature(pos, -vel, acc).unwrap() + 1.0 / r).abs() < 1e-14);
        let line = c.image_geodesic_curvature(pos, Vec2::new(1.0, 1.0), Vec2::ZERO).unwrap();
        assert_eq!(line, 0.0);
        assert!(matches!(
            c.image_geodesic_curvature(pos, Vec2::ZERO, acc),
            Err(Error::ZeroVelocity)
        ));
    }

    #[test]
    fn equator_is_a_geodesic() {
        let s = sphere();
        for i in 0..12 {
            let t = i as f64 * 0.5;
            let pos = Vec2::new(t.cos(), t.sin());
            let k = s
                .image_geodesic_curvature(pos, Vec2::new(-t.sin(), t.cos()), -pos)
                .unwrap();
            assert!(k.abs() < 1e-8, "{k}");
        }
    }

    #[test]
    fn connection_form_vanishes_on_flat_and_transports_frame_on_sphere() {
        let m = MetricChart::flat().jet(Vec2::new(0.1, 0.2)).unwrap();
        assert_eq!(m.connection_form(Vec2::new(1.0, 0.5)), 0.0);
        // Conformal metric e^{2w}: the connection form of e1 is -w_y dx + w_x dy.
        let s = sphere();
        let q = Vec2::new(0.3, -0.4);
        let r2 = q.x * q.x + q.y * q.y;
        let (wx, wy) = (-2.0 * q.x / (1.0 + r2), -2.0 * q.y / (1.0 + r2));
        let x = Vec2::new(0.7, 0.2);
        let mu = s.jet(q).unwrap().connection_form(x);
        assert!((mu - (-wy * x.x + wx * x.y)).abs() < 1e-12);
    }
}

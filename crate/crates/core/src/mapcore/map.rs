use crate::error::{Error, Result};
use crate::expr::{Expr, Func, Tape, Vars};
use crate::geom::{Mat2, Vec2};
use crate::surface::MetricChart;

/// Scale-aware rank tolerance for singular values of `Df`.
pub fn rank_tolerance(largest: f64) -> f64 {
    1e-8 * (largest + 1.0)
}

/// Value and derivatives of `f` up to second order at one point.
#[derive(Debug, Clone, Copy)]
pub struct MapJet {
    pub value: Vec2,
    pub jacobian: Mat2,
    pub f_uu: Vec2,
    pub f_uv: Vec2,
    pub f_vv: Vec2,
}

impl MapJet {
    /// `D^2 f(a, b)`.
    pub fn second(&self, a: Vec2, b: Vec2) -> Vec2 {
        self.f_uu * (a.x * b.x) + self.f_uv * (a.x * b.y + a.y * b.x) + self.f_vv * (a.y * b.y)
    }

    /// Coordinate velocity and acceleration of `f∘c` given those of `c`.
    pub fn push(&self, velocity: Vec2, accel: Vec2) -> (Vec2, Vec2) {
        let v = self.jacobian.apply(velocity);
        let a = self.second(velocity, velocity) + self.jacobian.apply(accel);
        (v, a)
    }
}

/// The map `f: M -> N` in coordinates, with exact symbolic jets.
#[derive(Debug, Clone)]
pub struct SurfaceMap {
    components: [Expr; 2],
    target: MetricChart,
    value: [Tape; 2],
    first: [Tape; 4],
    second: [Tape; 6],
    lambda_expr: Expr,
    lambda: Tape,
    lambda_grad: [Tape; 2],
    lambda_hess: [Tape; 3],
}

impl SurfaceMap {
    /// Variables of the domain chart: `u, v`.
    pub fn vars() -> Vars {
        Vars::new(&["u", "v"])
    }

    pub fn new(x: Expr, y: Expr, target: MetricChart) -> Result<Self> {
        for c in [&x, &y] {
            if c.max_var().is_some_and(|i| i > 1) {
                return Err(Error::InvalidDomain(format!("map component {c} uses unknown variables")));
            }
        }
        let d = |e: &Expr, i| e.differentiate(i);
        let (x_u, x_v, y_u, y_v) = (d(&x, 0), d(&x, 1), d(&y, 0), d(&y, 1));
        let second = [
            Tape::new(&d(&x_u, 0)),
            Tape::new(&d(&x_u, 1)),
            Tape::new(&d(&x_v, 1)),
            Tape::new(&d(&y_u, 0)),
            Tape::new(&d(&y_u, 1)),
            Tape::new(&d(&y_v, 1)),
        ];
        let jac_det = Expr::sub(Expr::mul(x_u.clone(), y_v.clone()), Expr::mul(x_v.clone(), y_u.clone()));
        let [e, f, g] = target.components();
        let metric_det = Expr::sub(Expr::mul(e.clone(), g.clone()), Expr::powi(f.clone(), 2));
        let density = Expr::call(Func::Sqrt, metric_det).substitute(&[x.clone(), y.clone()]);
        let lambda_expr = Expr::mul(density, jac_det);
        let l_u = d(&lambda_expr, 0);
        let l_v = d(&lambda_expr, 1);
        let lambda_hess = [Tape::new(&d(&l_u, 0)), Tape::new(&d(&l_u, 1)), Tape::new(&d(&l_v, 1))];
        Ok(SurfaceMap {
            value: [Tape::new(&x), Tape::new(&y)],
            first: [Tape::new(&x_u), Tape::new(&x_v), Tape::new(&y_u), Tape::new(&y_v)],
            second,
            lambda: Tape::new(&lambda_expr),
            lambda_grad: [Tape::new(&l_u), Tape::new(&l_v)],
            lambda_hess,
            lambda_expr,
            components: [x, y],
            target,
        })
    }

    pub fn from_strings(x: &str, y: &str, target: MetricChart) -> Result<Self> {
        let vars = Self::vars();
        Self::new(crate::expr::parse(x, &vars)?, crate::expr::parse(y, &vars)?, target)
    }

    pub fn components(&self) -> &[Expr; 2] {
        &self.components
    }

    pub fn target(&self) -> &MetricChart {
        &self.target
    }

    /// Symbolic signed area density.
    pub fn lambda_expr(&self) -> &Expr {
        &self.lambda_expr
    }

    pub fn eval(&self, p: Vec2) -> Result<Vec2> {
        let a = [p.x, p.y];
        Ok(Vec2::new(self.value[0].eval(&a)?, self.value[1].eval(&a)?))
    }

    pub fn jacobian(&self, p: Vec2) -> Result<Mat2> {
        let a = [p.x, p.y];
        Ok(Mat2::new(
            self.first[0].eval(&a)?,
            self.first[1].eval(&a)?,
            self.first[2].eval(&a)?,
            self.first[3].eval(&a)?,
        ))
    }

    pub fn jet(&self, p: Vec2) -> Result<MapJet> {
        let a = [p.x, p.y];
        let s = |i: usize| self.second[i].eval(&a);
        Ok(MapJet {
            value: self.eval(p)?,
            jacobian: self.jacobian(p)?,
            f_uu: Vec2::new(s(0)?, s(3)?),
            f_uv: Vec2::new(s(1)?, s(4)?),
            f_vv: Vec2::new(s(2)?, s(5)?),
        })
    }

    fn check_image(&self, p: Vec2) -> Result<()> {
        let q = self.eval(p)?;
        if q.is_finite() && self.target.contains(q) {
            Ok(())
        } else {
            Err(Error::ChartExit { x: q.x, y: q.y })
        }
    }

    /// `λ(p) = sqrt(EG - F^2)(f(p)) · det Df(p)`.
    pub fn signed_area_density(&self, p: Vec2) -> Result<f64> {
        self.check_image(p)?;
        self.lambda.eval(&[p.x, p.y])
    }

    /// `λ` without the chart-membership check, for inner loops that already know `f(p)` is valid.
    pub fn lambda_unchecked(&self, p: Vec2) -> Result<f64> {
        self.lambda.eval(&[p.x, p.y])
    }

    pub fn dlambda(&self, p: Vec2) -> Result<Vec2> {
        let a = [p.x, p.y];
        Ok(Vec2::new(self.lambda_grad[0].eval(&a)?, self.lambda_grad[1].eval(&a)?))
    }

    /// `(λ_uu, λ_uv, λ_vv)`.
    pub fn lambda_hessian(&self, p: Vec2) -> Result<(f64, f64, f64)> {
        let a = [p.x, p.y];
        Ok((
            self.lambda_hess[0].eval(&a)?,
            self.lambda_hess[1].eval(&a)?,
            self.lambda_hess[2].eval(&a)?,
        ))
    }

    /// Unit vector spanning `ker Df(p)`.
    ///
    /// With `along` given (a singular direction), the sign makes `{along, η}`
    /// positively oriented. Without it the tangent `(λ_v, -λ_u)` is used, and
    /// if that is parallel to the kernel the sign is fixed by `η.y > 0`
    /// (or `η.x > 0` when `η.y = 0`).
    pub fn null_direction(&self, p: Vec2, along: Option<Vec2>) -> Result<Vec2> {
        let j = self.jacobian(p)?;
        let (s1, s2) = j.singular_values();
        let tol = rank_tolerance(s1);
        if s1 < tol {
            return Err(Error::RankZero { u: p.x, v: p.y });
        }
        if s2 >= tol {
            return Err(Error::NotSingular { u: p.x, v: p.y });
        }
        let (r1, r2) = (Vec2::new(j.a, j.b), Vec2::new(j.c, j.d));
        let row = if r1.norm() >= r2.norm() { r1 } else { r2 };
        let mut eta = row.perp().normalized();
        let reference = match along {
            Some(a) => a,
            None => {
                let g = self.dlambda(p)?;
                Vec2::new(g.y, -g.x)
            }
        };
        let orient = reference.cross(eta);
        if orient.abs() > 1e-12 * reference.norm() {
            if orient < 0.0 {
                eta = -eta;
            }
        } else if eta.y < 0.0 || (eta.y == 0.0 && eta.x < 0.0) {
            eta = -eta;
        }
        Ok(eta)
    }

    /// First fundamental form `ds^2 = f^* g` as a symmetric matrix.
    pub fn pullback_metric(&self, p: Vec2) -> Result<Mat2> {
        let j = self.jacobian(p)?;
        let m = self.target.jet(self.eval(p)?)?;
        let (fu, fv) = (Vec2::new(j.a, j.c), Vec2::new(j.b, j.d));
        let off = m.inner(fu, fv);
        Ok(Mat2::new(m.inner(fu, fu), off, off, m.inner(fv, fv)))
    }
}

use super::trace::tangent;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mapcore::SurfaceMap;

/// Geometry of `f` along `Σ` at one point for a chosen unit singular direction.
#[derive(Debug, Clone, Copy)]
pub struct SingularFrame {
    /// `f' = df(γ')`.
    pub f1: Vec2,
    /// `f'' = D_t f'`.
    pub f2: Vec2,
    pub speed: f64,
    /// `dA_N(f', f'')`.
    pub area: f64,
    /// `sgn dλ(η)` with `{γ', η}` positively oriented.
    pub sign: f64,
}

/// Unit-speed jet `(γ', γ'')` of the level curve `λ = 0` through `p` moving along `direction`.
pub fn level_curve_jet(map: &SurfaceMap, p: Vec2, direction: Vec2) -> Result<(Vec2, Vec2)> {
    let (t, grad_norm) = tangent(map, p)?;
    let gamma1 = if direction.dot(t) >= 0.0 { t } else { -t };
    let g = map.dlambda(p)?;
    let (huu, huv, hvv) = map.lambda_hessian(p)?;
    let q = huu * gamma1.x * gamma1.x + 2.0 * huv * gamma1.x * gamma1.y + hvv * gamma1.y * gamma1.y;
    Ok((gamma1, g * (-q / (grad_norm * grad_norm))))
}

pub fn singular_frame(map: &SurfaceMap, p: Vec2, direction: Vec2) -> Result<SingularFrame> {
    let (gamma1, gamma2) = level_curve_jet(map, p, direction)?;
    let (t, _) = tangent(map, p)?;
    // dλ(η) = |∇λ| det(T, η), and det(γ', η) > 0, so the sign is that of <γ', T>.
    let sign = if gamma1.dot(t) >= 0.0 { 1.0 } else { -1.0 };
    let jet = map.jet(p)?;
    let (f1, acc) = jet.push(gamma1, gamma2);
    let m = map.target().jet(jet.value)?;
    let speed = m.norm(f1);
    if speed < 1e-9 * (1.0 + jet.jacobian.frobenius()) {
        return Err(Error::SecondKindPoint { u: p.x, v: p.y });
    }
    let f2 = acc + m.christoffel().contract(f1, f1);
    Ok(SingularFrame { f1, f2, speed, area: m.area(f1, f2), sign })
}

/// `(κ_s, κ_s ds/dσ)` at `p` where `σ` is domain arclength along `Σ` and
/// `ds = |f'| dσ` is the first-fundamental-form arclength.
pub fn singular_curvature(map: &SurfaceMap, p: Vec2, direction: Vec2) -> Result<(f64, f64)> {
    let fr = singular_frame(map, p, direction)?;
    let kappa = fr.sign * fr.area / (fr.speed * fr.speed * fr.speed);
    Ok((kappa, fr.sign * fr.area / (fr.speed * fr.speed)))
}

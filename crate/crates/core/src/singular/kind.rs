use serde::Serialize;

use super::trace::{bracket_root, golden_min, SingularComponent, Topology};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mapcore::SurfaceMap;

/// `|δ|` above this marks a sample as first kind.
pub const KIND_TOL: f64 = 1e-6;
const ZERO_TOL: f64 = 1e-9;
const COEFF_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SecondKindPoint {
    pub component: usize,
    pub sigma: f64,
    pub point: Vec2,
    /// `k` with `δ^(j)(0) = 0` for `j <= k` and `δ^(k+1)(0) != 0`.
    pub order: usize,
    /// Least-squares coefficients of `δ` in the scaled window variable.
    pub fit: [f64; 5],
}

#[derive(Debug, Clone, Serialize)]
pub struct KindReport {
    pub first_kind: Vec<bool>,
    pub second_kind: Vec<SecondKindPoint>,
}

/// Flag samples by kind and locate the second-kind points of one component.
pub fn classify_kind(map: &SurfaceMap, comp: &SingularComponent, index: usize, step: f64) -> Result<KindReport> {
    let n = comp.samples.len();
    let first_kind = comp.samples.iter().map(|s| s.delta.abs() > KIND_TOL).collect();
    let delta = |s: f64| comp.delta_at(map, s);
    let closed = comp.topology == Topology::Closed;
    let mut sig: Vec<f64> = comp.samples.iter().map(|s| s.sigma).collect();
    let mut del: Vec<f64> = comp.samples.iter().map(|s| s.delta).collect();
    if closed {
        sig.push(comp.length);
        del.push(delta(comp.length)?);
    }
    let m = sig.len();
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..m - 1 {
        if (del[i] < 0.0) != (del[i + 1] < 0.0) {
            roots.push(bracket_root(delta, sig[i], sig[i + 1], 1e-13)?);
        }
    }
    // Even-order zeros do not change sign; look for near-zero minima of |δ|.
    for i in 1..m - 1 {
        let (a, b, c) = (del[i - 1].abs(), del[i].abs(), del[i + 1].abs());
        let sign_change = (del[i - 1] < 0.0) != (del[i] < 0.0) || (del[i] < 0.0) != (del[i + 1] < 0.0);
        if b <= a && b <= c && b < 0.05 && !sign_change {
            let (s, v) = golden_min(|s| Ok(delta(s)?.abs()), sig[i - 1], sig[i + 1], 80)?;
            if v < ZERO_TOL {
                roots.push(s);
            }
        }
    }
    if !closed && n >= 2 {
        // δ vanishing at an end point of an arc is a boundary matter, not an interior vertex.
        roots.retain(|&s| s > 1e-9 && s < comp.length - 1e-9);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-7);
    let mut second_kind = Vec::new();
    for s in roots {
        let s = if closed { s.rem_euclid(comp.length) } else { s };
        let w = if closed {
            (4.0 * step).min(0.25 * comp.length)
        } else {
            (4.0 * step).min(0.9 * s.min(comp.length - s))
        };
        let (order, fit) = zero_order(&delta, s, w)?;
        let point = comp.point_at(map, s)?;
        let Some(order) = order else {
            return Err(Error::NonAdmissible { u: point.x, v: point.y });
        };
        second_kind.push(SecondKindPoint { component: index, sigma: s, point, order, fit });
    }
    Ok(KindReport { first_kind, second_kind })
}

/// Order of the zero of `δ` at `s` from a degree-4 least-squares fit on `[s - w, s + w]`.
fn zero_order(delta: &impl Fn(f64) -> Result<f64>, s: f64, w: f64) -> Result<(Option<usize>, [f64; 5])> {
    const NODES: usize = 11;
    let mut xs = [0.0; NODES];
    let mut ys = [0.0; NODES];
    for j in 0..NODES {
        xs[j] = -1.0 + 2.0 * j as f64 / (NODES - 1) as f64;
        ys[j] = delta(s + w * xs[j])?;
    }
    let fit = polyfit4(&xs, &ys);
    if ys.iter().all(|y| y.abs() < ZERO_TOL) {
        return Ok((None, fit));
    }
    Ok(((1..5).find(|&k| fit[k].abs() > COEFF_TOL).map(|k| k - 1), fit))
}

fn polyfit4(xs: &[f64], ys: &[f64]) -> [f64; 5] {
    let mut a = [[0.0f64; 6]; 5];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut pw = [1.0f64; 9];
        for k in 1..9 {
            pw[k] = pw[k - 1] * x;
        }
        for r in 0..5 {
            for c in 0..5 {
                a[r][c] += pw[r + c];
            }
            a[r][5] += pw[r] * y;
        }
    }
    for col in 0..5 {
        let piv = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..5 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..6 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut out = [0.0; 5];
    for r in 0..5 {
        out[r] = a[r][5] / a[r][r];
    }
    out
}

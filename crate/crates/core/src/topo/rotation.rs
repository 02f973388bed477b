use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geom::{turn_angle, Vec2};

/// Rounding residual above which a turning number is rejected.
pub const INDEX_TOL: f64 = 0.05;
const MAX_STEP_TURN: f64 = std::f64::consts::FRAC_PI_2;

/// Total turning of a closed curve's tangent, in full turns, from tangent
/// samples taken in order around the curve.
pub fn turning_number(tangents: &[Vec2]) -> Result<f64> {
    let scale = tangents.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if tangents.len() < 3 || tangents.iter().any(|t| !t.is_finite() || t.norm() <= 1e-12 * scale) || scale == 0.0 {
        return Err(Error::VanishingTangent);
    }
    let n = tangents.len();
    let turns: Vec<f64> = (0..n).map(|i| turn_angle(tangents[i], tangents[(i + 1) % n])).collect();
    if turns.iter().any(|t| t.abs() > MAX_STEP_TURN) {
        return Err(Error::Tracing("tangent samples too sparse to follow the turning".into()));
    }
    Ok(turns.iter().sum::<f64>() / TAU)
}

/// Rotation index of a closed plane curve.
pub fn rotation_index(tangents: &[Vec2]) -> Result<i64> {
    let w = turning_number(tangents)?;
    let k = w.round();
    if (w - k).abs() > INDEX_TOL {
        return Err(Error::NonInteger { value: w });
    }
    Ok(k as i64)
}

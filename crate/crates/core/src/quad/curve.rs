use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Kronrod abscissae on `[-1, 1]`, non-negative half; odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, error: 0.0 };

    pub fn scaled(self, k: f64) -> Estimate {
        Estimate { value: k * self.value, error: k.abs() * self.error }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate { value: self.value - o.value, error: self.error + o.error }
    }
}

/// Absolute tolerance and work budget for one integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadOptions {
    pub tol: f64,
    /// Maximum number of intervals (curves) or cells (regions).
    pub budget: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { tol: 1e-9, budget: 20_000 }
    }
}

impl QuadOptions {
    pub fn new(tol: f64, budget: usize) -> Self {
        QuadOptions { tol, budget }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidRequest(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.budget == 0 {
            return Err(Error::InvalidRequest("budget must be positive".into()));
        }
        Ok(())
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in values {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Interval {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn kronrod(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<Interval> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x)?;
        if !y.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        Ok(y)
    };
    let center = eval(c)?;
    let mut k = WGK[7] * center;
    let mut g = WG[3] * center;
    for j in 0..7 {
        let d = h * XGK[j];
        let pair = eval(c - d)? + eval(c + d)?;
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    Ok(Interval { a, b, value: k * h, error: ((k - g) * h).abs() })
}

/// Globally adaptive 15/7 Gauss-Kronrod integration of `f` over
/// `[splits[0], splits[last]]`, never placing a node on a split point.
pub fn integrate_curve(
    mut f: impl FnMut(f64) -> Result<f64>,
    splits: &[f64],
    opts: QuadOptions,
) -> Result<Estimate> {
    opts.validate()?;
    if splits.len() < 2 {
        return Err(Error::InvalidRequest("need at least two split points".into()));
    }
    if splits.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidRequest("split points must be sorted".into()));
    }
    let mut heap = BinaryHeap::new();
    for w in splits.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1])?);
        }
    }
    let mut count = heap.len();
    loop {
        let error = compensated_sum(heap.iter().map(|i| i.error));
        if error <= opts.tol {
            break;
        }
        let Some(worst) = heap.peek() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if count + 1 > opts.budget || !(mid > worst.a && mid < worst.b) {
            return Err(Error::BudgetExceeded { estimate: error });
        }
        let worst = heap.pop().expect("peeked");
        heap.push(kronrod(&mut f, worst.a, mid)?);
        heap.push(kronrod(&mut f, mid, worst.b)?);
        count += 1;
    }
    let mut parts: Vec<&Interval> = heap.iter().collect();
    parts.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(Estimate {
        value: compensated_sum(parts.iter().map(|i| i.value)),
        error: compensated_sum(parts.iter().map(|i| i.error)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let e = integrate_curve(|x| Ok(x.powi(20) - 3.0 * x), &[0.0, 1.0], QuadOptions::default()).unwrap();
        assert!((e.value - (1.0 / 21.0 - 1.5)).abs() < 1e-14);
    }

    #[test]
    fn split_points_are_respected() {
        let mut hit = false;
        let e = integrate_curve(
            |x| {
                hit |= x == 0.5;
                Ok((x - 0.5).abs().sqrt())
            },
            &[0.0, 0.5, 1.0],
            QuadOptions::new(1e-10, 10_000),
        )
        .unwrap();
        assert!(!hit);
        assert!((e.value - 2.0 / 3.0 * 0.5f64.powf(1.5) * 2.0).abs() < 1e-9);
    }

    #[test]
    fn periodic_integrand() {
        let e = integrate_curve(|t| Ok(1.0 / (2.0 + t.cos())), &[0.0, 2.0 * PI], QuadOptions::default()).unwrap();
        assert!((e.value - 2.0 * PI / 3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn budget_and_bad_requests() {
        let r = integrate_curve(|x| Ok(1.0 / (x - 0.3).abs().sqrt()), &[0.0, 1.0], QuadOptions::new(1e-12, 20));
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
        assert!(matches!(integrate_curve(Ok, &[1.0, 0.0], QuadOptions::default()), Err(Error::InvalidRequest(_))));
        assert!(matches!(integrate_curve(Ok, &[0.0, 1.0], QuadOptions::new(0.0, 10)), Err(Error::InvalidRequest(_))));
        assert!(matches!(
            integrate_curve(|x| Ok(if x > 0.3 { f64::NAN } else { 0.0 }), &[0.0, 1.0], QuadOptions::default()),
            Err(Error::NonFinite { .. })
        ));
    }
}

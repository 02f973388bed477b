use std::f64::consts::{PI, TAU};

use super::report::{Diagnostics, EulerSummary, Identity, Provenance, TheoremReport, Term};
use super::scenario::{analyze, Analysis, AtStage, Failure, Scenario, Stage};
use crate::error::Error;
use crate::quad::{
    boundary_geodesic_term, boundary_geodesic_terms, integrate_region, singular_curvature_integral,
    BoundaryCombination, Estimate, RegionMode,
};
use crate::singular::{transversality_check, SignClass, SingularComponent, Stratum, Topology};
use crate::topo::{mapping_degree, rotation_index, DegreeOptions, DegreeReport, INDEX_TOL};

type Outcome<T> = std::result::Result<T, Failure>;

const LOOP_SAMPLES: usize = 1024;

fn diagnostics(a: &Analysis, notes: Vec<String>) -> Diagnostics {
    Diagnostics {
        points: a.points.clone(),
        decomposition: a.decomposition.counts(),
        euler: EulerSummary::of(&a.decomposition),
        notes,
    }
}

/// Signed counts of classified points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PointCounts {
    pub interior_plus: i64,
    pub interior_minus: i64,
    pub boundary_plus: i64,
    pub boundary_minus: i64,
    pub boundary_null: i64,
}

impl PointCounts {
    pub fn of(a: &Analysis) -> Self {
        let mut c = PointCounts::default();
        for p in &a.points {
            match (p.stratum, p.sign) {
                (Stratum::Interior, SignClass::Positive) => c.interior_plus += 1,
                (Stratum::Interior, SignClass::Negative) => c.interior_minus += 1,
                (Stratum::Interior, SignClass::Null) => {}
                (Stratum::Boundary, SignClass::Positive) => c.boundary_plus += 1,
                (Stratum::Boundary, SignClass::Negative) => c.boundary_minus += 1,
                (Stratum::Boundary, SignClass::Null) => c.boundary_null += 1,
            }
        }
        c
    }
}

fn sigma_curvature(s: &Scenario, a: &Analysis) -> Outcome<Vec<Estimate>> {
    a.set
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| singular_curvature_integral(&s.map, c, &a.second_kind_sigmas(i), s.options.quad))
        .collect::<crate::error::Result<Vec<_>>>()
        .at(Stage::Integrate)
}

fn integral_term(name: &str, e: Estimate) -> Term {
    Term::new(name, e.value, e.error, Provenance::Integral)
}

/// Gauss-Bonnet with the absolute area measure, `κ_s` on `Σ` and the
/// intrinsic geodesic curvature of `∂M`.
pub fn gb1(s: &Scenario, a: &Analysis) -> Outcome<TheoremReport> {
    let q = s.options.quad;
    let region = integrate_region(&s.map, &s.domain, RegionMode::Absolute, q).at(Stage::Integrate)?;
    let sigma = sigma_curvature(s, a)?.into_iter().fold(Estimate::ZERO, |x, y| x + y);
    let boundary =
        boundary_geodesic_term(&s.map, &s.domain, &a.set.crossings, BoundaryCombination::Formula1, q).at(Stage::Integrate)?;
    let chi = a.decomposition.euler_characteristic(crate::topo::EulerSelector::M);
    let null_angles: f64 = a
        .points
        .iter()
        .filter(|p| p.stratum == Stratum::Boundary && p.sign == SignClass::Null)
        .map(|p| 2.0 * p.alpha_plus - PI)
        .sum();
    let lhs = vec![
        integral_term("∫_M K dA", region),
        integral_term("2∫_Σ κ_s ds", sigma.scaled(2.0)),
        integral_term("∫_∂M κ_g ds", boundary),
    ];
    let rhs = vec![
        Term::count("2πχ(M)", TAU * chi as f64),
        Term::new("Σ_null (2α+ - π)", null_angles, 0.0, Provenance::Angle),
    ];
    Ok(TheoremReport::assemble(Identity::Gb1, &s.name, lhs, rhs, s.options.tolerance, diagnostics(a, Vec::new())))
}

/// Gauss-Bonnet with the signed area measure and the one-sided boundary terms.
pub fn gb2(s: &Scenario, a: &Analysis) -> Outcome<TheoremReport> {
    let q = s.options.quad;
    let region = integrate_region(&s.map, &s.domain, RegionMode::Signed, q).at(Stage::Integrate)?;
    let plus = boundary_geodesic_term(&s.map, &s.domain, &a.set.crossings, BoundaryCombination::Formula2Plus, q)
        .at(Stage::Integrate)?;
    let minus = boundary_geodesic_term(&s.map, &s.domain, &a.set.crossings, BoundaryCombination::Formula2Minus, q)
        .at(Stage::Integrate)?;
    let e = EulerSummary::of(&a.decomposition);
    let c = PointCounts::of(a);
    let lhs = vec![
        integral_term("∫_M K dÂ", region),
        integral_term("∫_{∂M∩M+} κ_g ds", plus),
        integral_term("-∫_{∂M∩M-} κ_g ds", minus.scaled(-1.0)),
    ];
    let rhs = vec![
        Term::count("2π(χ(M+) - χ(M-))", TAU * (e.open_plus - e.open_minus) as f64),
        Term::count("2π(#S+ - #S-)", TAU * (c.interior_plus - c.interior_minus) as f64),
        Term::count("π(#(Σ∩∂M)+ - #(Σ∩∂M)-)", PI * (c.boundary_plus - c.boundary_minus) as f64),
    ];
    Ok(TheoremReport::assemble(Identity::Gb2, &s.name, lhs, rhs, s.options.tolerance, diagnostics(a, Vec::new())))
}

fn rounded_index(value: f64) -> Outcome<i64> {
    let k = value.round();
    if (value - k).abs() > INDEX_TOL {
        return Err(Failure { stage: Stage::Assemble, error: Error::NonInteger { value } });
    }
    Ok(k as i64)
}

/// Rotation index of the image of a closed component of `Σ`, traversed with
/// `M+` on the left. The image tangent reverses at each cusp, so it is
/// flipped together with the sign of `δ` to follow the continuous tangent line.
fn sigma_winding(s: &Scenario, comp: &SingularComponent) -> crate::error::Result<i64> {
    let n = comp.samples.len();
    let mut forward = 0.0;
    for i in 0..n {
        let step = if i + 1 < n {
            comp.samples[i + 1].point - comp.samples[i].point
        } else {
            comp.samples[0].point + comp.shift - comp.samples[i].point
        };
        forward += step.dot(comp.samples[i].tangent);
    }
    let mut tangents = Vec::with_capacity(n);
    for smp in &comp.samples {
        let j = s.map.jacobian(smp.point)?;
        let img = j.apply(smp.tangent);
        if img.norm() <= 1e-9 * (1.0 + j.frobenius()) || smp.delta == 0.0 {
            continue;
        }
        tangents.push(img.normalized() * smp.delta.signum());
    }
    if forward < 0.0 {
        tangents.reverse();
    }
    rotation_index(&tangents)
}

/// Rotation index of `f` along a boundary loop, weighted by the sign of `λ` on it.
fn boundary_winding(s: &Scenario, li: usize) -> crate::error::Result<i64> {
    let lp = &s.domain.loops()[li];
    let (t0, t1) = lp.range();
    let mut tangents = Vec::with_capacity(LOOP_SAMPLES);
    for k in 0..LOOP_SAMPLES {
        let t = t0 + (t1 - t0) * k as f64 / LOOP_SAMPLES as f64;
        tangents.push(s.map.jacobian(lp.point(t)?)?.apply(lp.velocity(t)?));
    }
    let side = s.map.lambda_unchecked(lp.point(t0)?)?.signum() as i64;
    Ok(side * rotation_index(&tangents)?)
}

/// Levine's relation between `χ(M)` and the rotation indices of the images
/// of `Σ` and `∂M`, for a flat target and `Σ ∩ ∂M = ∅`.
pub fn levine(s: &Scenario, a: &Analysis) -> Outcome<TheoremReport> {
    if !s.map.target().is_flat() {
        return Err(Failure {
            stage: Stage::Assemble,
            error: Error::Hypothesis("the target metric must be flat".into()),
        });
    }
    transversality_check(&a.set, true).at(Stage::Assemble)?;
    let mut notes = Vec::new();
    let mut rhs = Vec::new();
    let mut twice_rhs = 0i64;
    let integrals = sigma_curvature(s, a)?;
    for (i, (comp, e)) in a.set.components.iter().zip(&integrals).enumerate() {
        if comp.topology != Topology::Closed {
            return Err(Failure {
                stage: Stage::Assemble,
                error: Error::Hypothesis(format!("singular component {i} is not closed")),
            });
        }
        let from_integral = rounded_index(e.value / TAU)?;
        let from_winding = sigma_winding(s, comp).at(Stage::Assemble)?;
        if from_integral != from_winding {
            return Err(Failure {
                stage: Stage::Assemble,
                error: Error::IndexDisagreement { first: from_integral as f64, second: from_winding as f64 },
            });
        }
        notes.push(format!("I(c_{}) = {} (∫κ_s/2π = {:.9})", i + 1, from_integral, e.value / TAU));
        twice_rhs += 2 * from_integral;
        rhs.push(Term::new(format!("I(c_{})", i + 1), from_integral as f64, (e.value / TAU - from_integral as f64).abs(), Provenance::Integral));
    }
    let boundary = boundary_geodesic_terms(&s.map, &s.domain, &[], BoundaryCombination::Formula1, s.options.quad)
        .at(Stage::Integrate)?;
    for (li, e) in boundary.iter().enumerate() {
        let from_integral = rounded_index(e.value / TAU)?;
        let from_winding = boundary_winding(s, li).at(Stage::Assemble)?;
        if from_integral != from_winding {
            return Err(Failure {
                stage: Stage::Assemble,
                error: Error::IndexDisagreement { first: from_integral as f64, second: from_winding as f64 },
            });
        }
        notes.push(format!("I(e_{}) = {} (∫κ_g/2π = {:.9})", li + 1, from_integral, e.value / TAU));
        twice_rhs += from_integral;
        rhs.push(Term::new(
            format!("½I(e_{})", li + 1),
            0.5 * from_integral as f64,
            0.5 * (e.value / TAU - from_integral as f64).abs(),
            Provenance::Integral,
        ));
    }
    let chi = a.decomposition.euler_characteristic(crate::topo::EulerSelector::M);
    let lhs = vec![Term::count("χ(M)/2", 0.5 * chi as f64)];
    let mut report = TheoremReport::assemble(Identity::Levine, &s.name, lhs, rhs, 0.0, diagnostics(a, notes));
    report.pass = chi == twice_rhs;
    Ok(report)
}

/// Doubled right-hand sides of the degree identity in its successive forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QfiForms {
    pub lhs: i64,
    pub open: i64,
    pub closed: i64,
    pub closure_relation: bool,
    pub final_form: i64,
}

impl QfiForms {
    pub fn new(degree: i64, chi_n: i64, e: &EulerSummary, c: &PointCounts) -> Self {
        let s = c.interior_plus - c.interior_minus;
        let b = c.boundary_plus - c.boundary_minus;
        QfiForms {
            lhs: 2 * degree * chi_n,
            open: 2 * (e.open_plus - e.open_minus) + 2 * s + b,
            closed: 2 * (e.closure_plus - e.closure_minus) + 2 * s + b,
            closure_relation: e.closure_relation_holds(),
            final_form: 2 * e.m - 4 * e.closure_minus + 2 * s + 2 * c.boundary_plus + c.boundary_null,
        }
    }

    pub fn holds(&self) -> bool {
        self.closure_relation && self.open == self.lhs && self.closed == self.lhs && self.final_form == self.lhs
    }
}

/// The degree of `f` against the Euler characteristics of `M` and its folds.
pub fn qfi(s: &Scenario, a: &Analysis) -> Outcome<TheoremReport> {
    let Some(target) = &s.target_domain else {
        return Err(Failure {
            stage: Stage::Degree,
            error: Error::InvalidRequest("the degree identity needs a target domain".into()),
        });
    };
    let opts = DegreeOptions { quad: s.options.quad, ..DegreeOptions::default() };
    let deg: DegreeReport = mapping_degree(&s.map, &s.domain, target, &a.set, opts).at(Stage::Degree)?;
    let chi_n = target.euler_characteristic();
    let e = EulerSummary::of(&a.decomposition);
    let c = PointCounts::of(a);
    let forms = QfiForms::new(deg.degree, chi_n, &e, &c);
    let mut notes = vec![
        format!("degree {} from values {:?}", deg.degree, deg.counts.iter().map(|k| (k.value.x, k.value.y)).collect::<Vec<_>>()),
        format!("2·deg·χ(N) = {}, open form {}, closure form {}, final form {}", forms.lhs, forms.open, forms.closed, forms.final_form),
        format!("closure relation {}", if forms.closure_relation { "holds" } else { "fails" }),
    ];
    if let Some(r) = deg.integral_ratio {
        notes.push(format!("curvature integral ratio {r:.6}"));
    }
    let lhs = vec![Term::count("deg(f)·χ(N)", (deg.degree * chi_n) as f64)];
    let rhs = vec![
        Term::count("χ(M)", e.m as f64),
        Term::count("-2χ(cl M-)", -2.0 * e.closure_minus as f64),
        Term::count("#S+", c.interior_plus as f64),
        Term::count("-#S-", -(c.interior_minus as f64)),
        Term::count("#(Σ∩∂M)+", c.boundary_plus as f64),
        Term::count("½#(Σ∩∂M)null", 0.5 * c.boundary_null as f64),
    ];
    let mut report = TheoremReport::assemble(Identity::Qfi, &s.name, lhs, rhs, 0.0, diagnostics(a, notes));
    report.pass = forms.holds();
    Ok(report)
}

pub fn check(identity: Identity, s: &Scenario, a: &Analysis) -> Outcome<TheoremReport> {
    match identity {
        Identity::Gb1 => gb1(s, a),
        Identity::Gb2 => gb2(s, a),
        Identity::Levine => levine(s, a),
        Identity::Qfi => qfi(s, a),
    }
}

/// Analyze the scenario once and check each requested identity.
pub fn run(s: &Scenario, identities: &[Identity]) -> Outcome<Vec<Outcome<TheoremReport>>> {
    let a = analyze(s)?;
    Ok(identities.iter().map(|&id| check(id, s, &a)).collect())
}

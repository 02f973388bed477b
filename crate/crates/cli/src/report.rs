use std::f64::consts::PI;
use std::fmt::Write;

use serde::Serialize;
use singauss::singular::{PointKind, SignClass, SingularPointRecord, Stratum, Topology};
use singauss::theorems::{Term, TheoremReport};

use crate::config::ScenarioConfig;
use crate::runner::{batch_status, FailureRecord, ScenarioRun, Status};

#[derive(Debug, Clone, Serialize)]
struct ComponentSummary {
    topology: Topology,
    length: f64,
    samples: usize,
    endpoints: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
struct RunDocument<'a> {
    scenario: &'a str,
    status: Status,
    config: &'a ScenarioConfig,
    singular_components: Vec<ComponentSummary>,
    reports: &'a [TheoremReport],
    failures: &'a [FailureRecord],
}

#[derive(Debug, Clone, Serialize)]
struct BatchDocument<'a> {
    status: Status,
    scenarios: Vec<RunDocument<'a>>,
}

fn document(run: &ScenarioRun) -> RunDocument<'_> {
    let singular_components = run
        .analysis
        .iter()
        .flat_map(|a| &a.set.components)
        .map(|c| {
            let ends = match c.topology {
                Topology::Closed => vec![],
                Topology::Arc => [c.samples.first(), c.samples.last()]
                    .into_iter()
                    .flatten()
                    .map(|s| [s.point.x, s.point.y])
                    .collect(),
            };
            ComponentSummary { topology: c.topology, length: c.length, samples: c.samples.len(), endpoints: ends }
        })
        .collect();
    RunDocument {
        scenario: run.name(),
        status: run.status(),
        config: &run.config,
        singular_components,
        reports: &run.reports,
        failures: &run.failures,
    }
}

/// Machine-readable report of a batch; contains no timings, so identical
/// inputs give identical bytes.
pub fn json(runs: &[ScenarioRun]) -> String {
    let doc = BatchDocument { status: batch_status(runs), scenarios: runs.iter().map(document).collect() };
    serde_json::to_string_pretty(&doc).expect("reports serialize") + "\n"
}

fn angle(x: f64) -> String {
    format!("{:.4}π", x / PI)
}

fn point_row(p: &SingularPointRecord) -> String {
    let stratum = match p.stratum {
        Stratum::Interior => "interior",
        Stratum::Boundary => "boundary",
    };
    let kind = match p.kind {
        PointKind::First => "first kind".to_string(),
        PointKind::Second { order } => format!("second kind, order {order}"),
    };
    let sign = match p.sign {
        SignClass::Positive => "+",
        SignClass::Negative => "-",
        SignClass::Null => "null",
    };
    format!(
        "({:+.6}, {:+.6})  {stratum:<8}  {kind:<22}  {sign:<4}  α+ {}  α- {}  (raw {}, {})",
        p.location.x,
        p.location.y,
        angle(p.alpha_plus),
        angle(p.alpha_minus),
        angle(p.raw_alpha_plus),
        angle(p.raw_alpha_minus)
    )
}

fn term_rows(out: &mut String, side: &str, terms: &[Term]) {
    for t in terms {
        let prov = serde_json::to_value(t.provenance).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = writeln!(out, "    {side}  {:<28} {:>+20.12}  ± {:<9.2e} {prov}", t.name, t.value, t.error);
    }
}

/// Human-readable table for one scenario.
pub fn table(run: &ScenarioRun) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}  [{:?}]  {:.2?}", run.name(), run.status(), run.elapsed);
    if let Some(a) = &run.analysis {
        let closed = a.set.components.iter().filter(|c| c.topology == Topology::Closed).count();
        let _ = writeln!(
            out,
            "  Σ: {} component(s), {} closed, {} boundary crossing(s), {} second-kind point(s)",
            a.set.components.len(),
            closed,
            a.set.crossings.len(),
            a.second_kind.len()
        );
        for p in &a.points {
            let _ = writeln!(out, "    {}", point_row(p));
        }
    }
    for r in &run.reports {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "  {:<6} {verdict}  lhs {:+.12}  rhs {:+.12}  residual {:.3e} ({:.3e}·2π)  tol {:.3e}",
            r.identity.to_string(),
            r.lhs_total,
            r.rhs_total,
            r.residual,
            r.residual_over_2pi,
            r.tolerance
        );
        term_rows(&mut out, "LHS", &r.lhs);
        term_rows(&mut out, "RHS", &r.rhs);
        let e = &r.diagnostics.euler;
        let _ = writeln!(
            out,
            "    χ(M) {}  χ(cl M+) {}  χ(cl M-) {}  χ(M+) {}  χ(M-) {}  χ(Σ) {}",
            e.m, e.closure_plus, e.closure_minus, e.open_plus, e.open_minus, e.sigma
        );
        for n in &r.diagnostics.notes {
            let _ = writeln!(out, "    {n}");
        }
    }
    for f in &run.failures {
        let id = f.identity.map_or("-".to_string(), |i| i.to_string());
        let stage = f.stage.map_or("config".to_string(), |s| s.to_string());
        let _ = writeln!(out, "  {id:<6} ERROR [{:?}] at {stage} stage: {}", f.status, f.message);
    }
    out
}

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singauss::singular::{project, singular_curvature, tangent, PointKind, SignClass, SingularPointRecord, Stratum, SNAP_TOL};
use singauss::theorems::{Analysis, EulerSummary, Identity};
use singauss::topo::{mapping_degree, DegreeOptions};
use singauss::{parse, ChartRegion, MetricChart, SurfaceMap, Vars, Vec2};
use singauss_cli::builtins;
use singauss_cli::fuzz::{fuzz, FuzzOutcome};
use singauss_cli::runner::{run_config, Overrides, ScenarioRun, Status};

struct Outcome {
    ok: bool,
    detail: String,
}

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new(), notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn finish(self) -> Outcome {
        let ok = self.failures.is_empty();
        let detail = if ok { self.notes.join("; ") } else { self.failures.join("; ") };
        Outcome { ok, detail }
    }
}

fn run(name: &str) -> ScenarioRun {
    run_config(builtins::get(name, 0).unwrap_or_else(|| panic!("no built-in `{name}`")), Overrides::default())
}

fn within(c: &mut Check, run: &ScenarioRun, limit: f64) {
    let secs = run.elapsed.as_secs_f64();
    c.require(secs < limit, format!("{} took {secs:.2} s (limit {limit} s)", run.name()));
}

/// The report for `id`, recording a failure when it is missing.
fn report<'a>(c: &mut Check, run: &'a ScenarioRun, id: Identity) -> Option<&'a singauss::theorems::TheoremReport> {
    let r = run.report(id);
    if r.is_none() {
        c.require(false, format!("{}: no {id} report ({:?})", run.name(), run.failures));
    }
    r
}

fn residual_below(c: &mut Check, run: &ScenarioRun, id: Identity, bound: f64) {
    if let Some(r) = report(c, run, id) {
        c.require(r.residual < bound, format!("{}: {id} residual {:.3e} ≥ {bound:.3e}", run.name(), r.residual));
        c.note(format!("{} {id} {:.2e}", run.name(), r.residual));
    }
}

fn identity_disk() -> Outcome {
    let mut c = Check::new();
    let r = run("identity-disk");
    within(&mut c, &r, 1.0);
    for id in [Identity::Gb1, Identity::Gb2] {
        residual_below(&mut c, &r, id, 1e-8 * TAU);
        if let Some(rep) = r.report(id) {
            let ok = (rep.lhs_total - TAU).abs() < 1e-8 * TAU && (rep.rhs_total - TAU).abs() < 1e-8 * TAU;
            c.require(ok, format!("{id}: lhs {} rhs {}", rep.lhs_total, rep.rhs_total));
        }
    }
    c.finish()
}

fn fold_disk() -> Outcome {
    let mut c = Check::new();
    let r = run("fold-disk");
    within(&mut c, &r, 10.0);
    let Some(a) = r.analysis.as_ref() else {
        c.require(false, format!("no analysis: {:?}", r.failures));
        return c.finish();
    };
    let comps = &a.set.components;
    c.require(comps.len() == 1, format!("{} singular components", comps.len()));
    if let Some(comp) = comps.first() {
        let off = comp.samples.iter().map(|s| s.point.y.abs()).fold(0.0, f64::max);
        c.require(off < 1e-8, format!("Σ leaves the diameter by {off:.2e}"));
        c.require((comp.length - 2.0).abs() < 1e-6, format!("Σ has length {}", comp.length));
    }
    if let Some(rep) = report(&mut c, &r, Identity::Gb1) {
        let kappa = rep.lhs.iter().find(|t| t.name.contains("κ_s")).map_or(f64::NAN, |t| t.value);
        c.require(kappa.abs() < 1e-8, format!("κ_s integral {kappa:e}"));
        c.note(format!("κ_s integral {kappa:.1e}"));
    }
    let nulls = a.points.iter().filter(|p| p.stratum == Stratum::Boundary && p.sign == SignClass::Null).count();
    c.require(nulls == 2 && a.points.len() == 2, format!("{nulls} null boundary points of {}", a.points.len()));
    residual_below(&mut c, &r, Identity::Gb1, 1e-3 * TAU);
    c.finish()
}

fn cusp_disk() -> Outcome {
    let mut c = Check::new();
    let r = run("cusp-disk");
    within(&mut c, &r, 30.0);
    let Some(a) = r.analysis.as_ref() else {
        c.require(false, format!("no analysis: {:?}", r.failures));
        return c.finish();
    };
    let second: Vec<_> = a.points.iter().filter(|p| matches!(p.kind, PointKind::Second { .. })).collect();
    c.require(second.len() == 1, format!("{} second-kind points", second.len()));
    if let [p] = second[..] {
        c.require(p.location.norm() < 1e-6, format!("cusp at {:?}", p.location));
        let raw = p.raw_alpha_plus + p.raw_alpha_minus;
        c.require((raw - TAU).abs() <= 0.1 * PI, format!("raw α+ + α- = {raw}"));
        c.require(on_lattice(p), "snapped angles off the lattice");
        c.note(format!("raw α+ + α- = {:.4}π", raw / PI));
    }
    let e = EulerSummary::of(&a.decomposition);
    c.require(e.closure_relation_holds(), format!("closure relation fails: {e:?}"));
    residual_below(&mut c, &r, Identity::Gb2, 1e-3 * TAU);
    c.finish()
}

fn annulus_fold() -> Outcome {
    let mut c = Check::new();
    let r = run("annulus-concentric-fold");
    within(&mut c, &r, 30.0);
    if let Some(rep) = report(&mut c, &r, Identity::Levine) {
        c.require(rep.pass && rep.residual == 0.0, format!("LEVINE {} vs {}", rep.lhs_total, rep.rhs_total));
        for t in &rep.lhs.iter().chain(&rep.rhs).collect::<Vec<_>>() {
            c.require((2.0 * t.value).fract() == 0.0, format!("{} = {} is not a half-integer", t.name, t.value));
            c.require(t.error < 1e-6, format!("{}: curvature integral off its index by {:.2e}", t.name, t.error));
        }
        let curves = rep.diagnostics.notes.iter().filter(|n| n.starts_with("I(")).count();
        c.require(curves >= 3, format!("only {curves} curves checked"));
        c.note(format!("{curves} curves, χ/2 = {}", rep.lhs_total));
    }
    c.finish()
}

fn cylinders() -> Outcome {
    let mut c = Check::new();
    let mut seen = Vec::new();
    for info in builtins::list().into_iter().filter(|i| i.theorems.contains(&Identity::Qfi) && i.name != builtins::FUZZ) {
        let r = run(&info.name);
        within(&mut c, &r, 30.0);
        if let Some(rep) = report(&mut c, &r, Identity::Qfi) {
            c.require(rep.pass && rep.residual == 0.0, format!("{}: QFI {} vs {}", info.name, rep.lhs_total, rep.rhs_total));
        }
        let (Some(s), Some(a)) = (r.scenario.as_ref(), r.analysis.as_ref()) else { continue };
        let target = s.target_domain.as_ref().expect("QFI scenarios declare a target");
        match mapping_degree(&s.map, &s.domain, target, &a.set, DegreeOptions::default()) {
            Ok(d) => {
                c.require(
                    d.counts.len() >= 2 && d.counts.iter().all(|k| k.degree == d.degree),
                    format!("{}: preimage counts {:?}", info.name, d.counts.iter().map(|k| k.degree).collect::<Vec<_>>()),
                );
                if let Some(ratio) = d.integral_ratio {
                    c.require(
                        (ratio - d.degree as f64).abs() < 1e-6,
                        format!("{}: integral ratio {ratio} vs degree {}", info.name, d.degree),
                    );
                    c.note(format!("{} ratio {ratio:.9}", info.name));
                }
                seen.push((info.name, d.degree, d.integral_ratio.is_some()));
            }
            Err(e) => c.require(false, format!("{}: {e}", info.name)),
        }
    }
    for deg in [1, 2] {
        c.require(seen.iter().any(|s| s.1 == deg), format!("no cylinder scenario of degree {deg}"));
    }
    c.require(seen.iter().any(|s| s.2), "no curved-target cylinder scenario");
    c.note(format!("degrees {:?}", seen.iter().map(|s| (s.0.as_str(), s.1)).collect::<Vec<_>>()));
    c.finish()
}

fn curved_targets() -> Outcome {
    let mut c = Check::new();
    for name in ["sphere-target-fold", "hyperbolic-target-fold"] {
        let r = run(name);
        within(&mut c, &r, 60.0);
        residual_below(&mut c, &r, Identity::Gb1, 1e-3 * TAU);
        residual_below(&mut c, &r, Identity::Gb2, 1e-3 * TAU);
    }
    c.finish()
}

fn fuzz_trig(runs: &mut Vec<ScenarioRun>) -> Outcome {
    let mut c = Check::new();
    let start = Instant::now();
    let (summary, fuzzed) = fuzz(100, 1, Overrides::default());
    let elapsed = start.elapsed();
    c.require(elapsed < Duration::from_secs(600), format!("took {:.1} s", elapsed.as_secs_f64()));
    let mut worst = 0.0f64;
    for (entry, r) in summary.entries.iter().zip(&fuzzed) {
        match &entry.outcome {
            FuzzOutcome::Rejected { .. } => {}
            FuzzOutcome::Fail { reason } => c.require(false, format!("seed {}: {reason}", entry.seed)),
            FuzzOutcome::Pass { residual } => {
                worst = worst.max(*residual);
                c.require(*residual < 1e-2 * TAU, format!("seed {}: residual {residual:.3e}", entry.seed));
                c.require(r.report(Identity::Gb2).is_some_and(|g| g.pass), format!("seed {}: GB2 not passing", entry.seed));
            }
        }
    }
    c.note(format!(
        "{} passed, {} failed, {} rejected (rejection rate {:.1}%), worst residual {worst:.2e}, {:.1} s",
        summary.passed,
        summary.failed,
        summary.rejected,
        100.0 * summary.rejection_rate,
        elapsed.as_secs_f64()
    ));
    runs.extend(fuzzed);
    c.finish()
}

fn on_lattice(p: &SingularPointRecord) -> bool {
    let (sum, diff) = (p.alpha_plus + p.alpha_minus, p.alpha_plus - p.alpha_minus);
    let exact = |x: f64, y: f64| (x - y).abs() < 1e-12;
    match (p.stratum, p.sign) {
        (Stratum::Interior, s) => {
            let k = match s {
                SignClass::Positive => 1.0,
                SignClass::Null => 0.0,
                SignClass::Negative => -1.0,
            };
            matches!(p.kind, PointKind::Second { .. }) && exact(sum, TAU) && exact(diff, TAU * k)
        }
        (Stratum::Boundary, SignClass::Null) => diff.abs() < SNAP_TOL,
        (Stratum::Boundary, s) => exact(sum, PI) && exact(diff, if s == SignClass::Positive { PI } else { -PI }),
    }
}

fn derivative_orders(c: &mut Check, rng: &mut ChaCha8Rng) {
    let vars = Vars::new(&["u", "v"]);
    let texts = [
        "sin(u*v) + u^3 - 2*v",
        "exp(0.3*sin(u + v))*cos(v)",
        "atan(u - v^2)/(2 + sin(v))",
        "sqrt(1 + (u*v)^2) - log(2 + cos(u^2 + v))",
        "4/(1 + u^2 + v^2)^2",
        "u + 0.2*sin(2*pi*v) - 0.1*sin(2*pi*(u + v))",
    ];
    let (mut checked, mut worst) = (0, f64::INFINITY);
    for text in texts {
        let e = parse(text, &vars).unwrap();
        for var in 0..2 {
            let d = e.differentiate(var);
            for _ in 0..40 {
                let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let exact = d.eval(&p).unwrap();
                let central = |h: f64| {
                    let (mut a, mut b) = (p, p);
                    a[var] += h;
                    b[var] -= h;
                    (e.eval(&a).unwrap() - e.eval(&b).unwrap()) / (2.0 * h)
                };
                let (e1, e2) = ((central(2e-2) - exact).abs(), (central(1e-2) - exact).abs());
                if e1 <= 1e-9 * (1.0 + exact.abs()) {
                    continue;
                }
                let order = (e1 / e2).log2();
                worst = worst.min(order);
                checked += 1;
                c.require(order >= 1.9, format!("derivative order {order:.3} for {text} at {p:?}"));
            }
        }
    }
    c.note(format!("{checked} derivative orders ≥ {worst:.3}"));
}

fn trig(c: [f64; 4]) -> (String, String) {
    (
        format!("u + {}*sin(2*pi*v) + {}*sin(2*pi*(u + v))", c[0], c[1]),
        format!("v + {}*sin(2*pi*u) + {}*sin(2*pi*(u - v))", c[2], c[3]),
    )
}

fn coefficients(rng: &mut ChaCha8Rng) -> [f64; 4] {
    std::array::from_fn(|_| rng.random_range(-0.3..0.3))
}

fn pullback_determinants(c: &mut Check, rng: &mut ChaCha8Rng) {
    let sphere =
        MetricChart::from_strings("4/(1 + x^2 + y^2)^2", "0", "4/(1 + x^2 + y^2)^2", ChartRegion::everywhere(), None, None)
            .unwrap();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (x, y) = trig(coefficients(rng));
        let target = if i % 2 == 0 { MetricChart::flat() } else { sphere.clone() };
        let map = SurfaceMap::from_strings(&x, &y, target).unwrap();
        let p = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let det = map.pullback_metric(p).unwrap().det();
        let lam = map.signed_area_density(p).unwrap();
        let rel = (det - lam * lam).abs() / (1.0 + lam * lam);
        worst = worst.max(rel);
        c.require(rel <= 1e-10, format!("det ds² = {det}, λ² = {} for ({x}, {y})", lam * lam));
    }
    c.note(format!("200 det ds² = λ² checks, worst {worst:.1e}"));
}

fn kappa_invariance(c: &mut Check, rng: &mut ChaCha8Rng) {
    let flat = |x: &str, y: &str| SurfaceMap::from_strings(x, y, MetricChart::flat()).unwrap();
    let swap = |t: &str| t.replace('u', "\u{0}").replace('v', "u").replace('\u{0}', "v");
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs()));
    let kappa = |m: &SurfaceMap, p: Vec2, d: Vec2| singular_curvature(m, p, d).map(|k| k.0);
    let mut checked = 0;
    while checked < 100 {
        let (x, y) = trig(coefficients(rng));
        let map = flat(&x, &y);
        let start = Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let Ok(p) = project(&map, start) else { continue };
        let (Ok((t, _)), true) = (tangent(&map, p), (p - start).norm() < 0.5) else { continue };
        let Ok(k) = kappa(&map, p, t) else { continue };
        let mirrored = flat(&swap(&x), &swap(&y));
        let q = Vec2::new(p.y, p.x);
        let swapped = flat(&y, &x);
        let flipped = kappa(&map, p, -t);
        let source = tangent(&mirrored, q).and_then(|(s, _)| kappa(&mirrored, q, s));
        let target = tangent(&swapped, p).and_then(|(s, _)| kappa(&swapped, p, s));
        for (what, other) in [("direction", flipped), ("source orientation", source), ("target orientation", target)] {
            let ok = other.as_ref().is_ok_and(|&o| close(k, o));
            c.require(ok, format!("κ_s changes with the {what} at {p:?} for ({x}, {y}): {k} vs {other:?}"));
        }
        checked += 1;
    }
    c.note("100 κ_s orientation checks");
}

fn structural(c: &mut Check, runs: &[ScenarioRun]) {
    let (mut points, mut decompositions) = (0, 0);
    for r in runs {
        let Some(a): Option<&Analysis> = r.analysis.as_ref() else { continue };
        for p in &a.points {
            points += 1;
            c.require(on_lattice(p), format!("{}: point at {:?} off the lattice", r.name(), p.location));
        }
        let e = EulerSummary::of(&a.decomposition);
        decompositions += 1;
        c.require(e.closure_relation_holds(), format!("{}: closure relation fails: {e:?}", r.name()));
        c.require(e.open_plus + e.open_minus + e.sigma == e.m, format!("{}: open parts do not add up: {e:?}", r.name()));
    }
    c.note(format!("{points} classified points, {decompositions} decompositions"));
}

fn invariants(fuzzed: &[ScenarioRun]) -> Outcome {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    derivative_orders(&mut c, &mut rng);
    pullback_determinants(&mut c, &mut rng);
    kappa_invariance(&mut c, &mut rng);
    let mut runs: Vec<ScenarioRun> =
        builtins::list().into_iter().filter(|i| i.name != builtins::FUZZ).map(|i| run(&i.name)).collect();
    for r in &runs {
        c.require(r.status() == Status::Pass, format!("{}: {:?}", r.name(), r.status()));
    }
    runs.extend(fuzzed.iter().cloned());
    structural(&mut c, &runs);
    c.finish()
}

type Criterion = Box<dyn FnOnce(&mut Vec<ScenarioRun>) -> Outcome>;

fn main() {
    let mut fuzzed = Vec::new();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("identity-disk", Box::new(|_| identity_disk())),
        ("fold-disk", Box::new(|_| fold_disk())),
        ("cusp-disk", Box::new(|_| cusp_disk())),
        ("annulus-concentric-fold", Box::new(|_| annulus_fold())),
        ("cylinder scenarios", Box::new(|_| cylinders())),
        ("curved targets", Box::new(|_| curved_targets())),
        ("fuzz-trig x100", Box::new(fuzz_trig)),
        ("invariant suites", Box::new(|f| invariants(f))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = check(&mut fuzzed);
        let verdict = if out.ok { "PASS" } else { "FAIL" };
        println!("{verdict} {} {name} ({:.2} s): {}", i + 1, start.elapsed().as_secs_f64(), out.detail);
        if !out.ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

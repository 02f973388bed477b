use std::path::PathBuf;
use std::process::{Command, Output};

use singauss::singular::{PointKind, SignClass, Stratum};
use singauss::theorems::EulerSummary;
use singauss_cli::builtins;
use singauss_cli::config::ScenarioConfig;
use singauss_cli::fuzz::fuzz;
use singauss_cli::report;
use singauss_cli::runner::{run_config, Overrides, Status};
use singauss_cli::svg;

fn singauss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singauss")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn builtin(name: &str) -> ScenarioConfig {
    builtins::get(name, 0).unwrap_or_else(|| panic!("no built-in `{name}`"))
}

/// A built-in scenario with its text edited, written to a scratch file.
fn edited(name: &str, from: &str, to: &str) -> PathBuf {
    let text = builtin(name).to_toml();
    assert!(text.contains(from), "`{from}` not in {name}");
    let path = scratch(&format!("{name}-{}.toml", to.len()));
    std::fs::write(&path, text.replace(from, to)).unwrap();
    path
}

#[test]
fn exit_codes_follow_the_outcome() {
    assert_eq!(singauss(&["run", "--builtin", "identity-disk"]).status.code(), Some(0));
    assert_eq!(singauss(&["--tol", "1e-300", "run", "--builtin", "fold-disk"]).status.code(), Some(1));
    let levine = edited("fold-disk", r#""GB1", "GB2""#, r#""LEVINE""#);
    assert_eq!(singauss(&["run", levine.to_str().unwrap()]).status.code(), Some(2));
    let broken = edited("fold-disk", r#""v^2""#, r#""v^^2""#);
    assert_eq!(singauss(&["run", broken.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(singauss(&["run", "--builtin", "no-such-scenario"]).status.code(), Some(3));
    assert_eq!(singauss(&["run", "--tol", "abc", "--builtin", "identity-disk"]).status.code(), Some(3));
    assert_eq!(singauss(&["run", scratch("missing.toml").to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn unparseable_metric_is_a_configuration_error() {
    let mut cfg = builtin("sphere-target-fold");
    cfg.target.e = "4/(1 + x^2 + y^2".into();
    let run = run_config(cfg, Overrides::default());
    assert_eq!(run.status(), Status::ConfigurationError);
    assert_eq!(run.status().exit_code(), 3);
}

#[test]
fn list_shows_every_builtin() {
    let out = singauss(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let infos = builtins::list();
    assert!(infos.len() >= 12);
    assert!(text.lines().count() >= 12);
    for info in &infos {
        assert!(text.contains(&info.name), "{} missing from list", info.name);
        assert!(!info.theorems.is_empty());
    }
}

#[test]
fn scenario_files_round_trip() {
    for info in builtins::list() {
        let cfg = builtin(&info.name);
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back.to_toml(), cfg.to_toml());
    }
}

#[test]
fn json_reports_are_deterministic() {
    let path = scratch("cusp.json");
    let read = || {
        let out = singauss(&["run", "--builtin", "cusp-disk", "--json", path.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read_to_string(&path).unwrap()
    };
    let first = read();
    assert_eq!(first, read());
    let doc: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(doc["status"], "pass");
    assert_eq!(doc["scenarios"][0]["scenario"], "cusp-disk");
}

#[test]
fn fuzz_runs_are_reproducible() {
    let (a, runs) = fuzz(4, 11, Overrides::default());
    let (b, _) = fuzz(4, 11, Overrides::default());
    assert_eq!(a.count, 4);
    assert_eq!(a.passed + a.failed + a.rejected, 4);
    assert_eq!(report::json(&runs), report::json(&fuzz(4, 11, Overrides::default()).1));
    assert_eq!(serde_json::to_string(&a.entries).unwrap(), serde_json::to_string(&b.entries).unwrap());
    let (c, _) = fuzz(4, 12, Overrides::default());
    assert_ne!(serde_json::to_string(&a.entries).unwrap(), serde_json::to_string(&c.entries).unwrap());
}

fn picture(name: &str) -> String {
    let run = run_config(builtin(name), Overrides::default());
    svg::render(run.scenario.as_ref().unwrap(), run.analysis.as_ref().unwrap())
}

#[test]
fn svg_shows_the_singular_set_and_its_points() {
    let fold = picture("fold-disk");
    assert!(fold.starts_with("<svg") && fold.trim_end().ends_with("</svg>"));
    assert!(fold.contains(r#"id="sigma""#) && fold.contains("sigma-curve"));
    assert_eq!(fold.matches(r#"class="null""#).count(), 2);

    let cusp = picture("cusp-disk");
    assert_eq!(cusp.matches(r#"class="second-kind""#).count(), 1);

    let identity = picture("identity-disk");
    assert!(!identity.contains(r#"id="sigma""#));
    assert!(identity.contains(r#"id="boundary""#));
}

#[test]
fn svg_flag_writes_a_file() {
    let path = scratch("fold.svg");
    let _ = std::fs::remove_file(&path);
    let out = singauss(&["run", "--builtin", "fold-disk", "--svg", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&path).unwrap().contains(r#"id="sigma""#));
}

/// Every classified point sits on the angle lattice and every decomposition
/// satisfies the closure relation.
#[test]
fn builtins_respect_the_lattice_and_closure_relation() {
    use std::f64::consts::PI;
    for info in builtins::list().into_iter().filter(|i| i.name != builtins::FUZZ) {
        let run = run_config(builtin(&info.name), Overrides::default());
        assert_eq!(run.status(), Status::Pass, "{}: {:?}", info.name, run.failures);
        let a = run.analysis.as_ref().unwrap();
        let e = EulerSummary::of(&a.decomposition);
        assert!(e.closure_relation_holds(), "{}: {e:?}", info.name);
        for p in &a.points {
            let (sum, diff) = (p.alpha_plus + p.alpha_minus, p.alpha_plus - p.alpha_minus);
            match (p.stratum, p.kind, p.sign) {
                (Stratum::Interior, PointKind::Second { .. }, s) => {
                    assert!((sum - 2.0 * PI).abs() < 1e-12);
                    let k = match s {
                        SignClass::Positive => 1.0,
                        SignClass::Null => 0.0,
                        SignClass::Negative => -1.0,
                    };
                    assert!((diff - 2.0 * PI * k).abs() < 1e-12);
                }
                (Stratum::Interior, PointKind::First, _) => panic!("{}: interior point of the first kind", info.name),
                (Stratum::Boundary, _, SignClass::Null) => assert!(diff.abs() < 1e-6),
                (Stratum::Boundary, _, s) => {
                    assert!((sum - PI).abs() < 1e-12);
                    let k = if s == SignClass::Positive { 1.0 } else { -1.0 };
                    assert!((diff - PI * k).abs() < 1e-12);
                }
            }
        }
    }
}

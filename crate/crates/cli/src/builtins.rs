use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{DomainConfig, LoopConfig, MapConfig, OutputConfig, ScenarioConfig, TargetConfig};
use singauss::theorems::Identity;

pub const FUZZ: &str = "fuzz-trig";
const FUZZ_SUMMARY: &str = "randomized trigonometric perturbation of the identity (seeded)";
const FUZZ_AMPLITUDE: f64 = 0.3;

const REGISTRY: &[(&str, &str)] = &[
    ("identity-disk", include_str!("../scenarios/identity-disk.toml")),
    ("fold-disk", include_str!("../scenarios/fold-disk.toml")),
    ("cusp-disk", include_str!("../scenarios/cusp-disk.toml")),
    ("annulus-concentric-fold", include_str!("../scenarios/annulus-concentric-fold.toml")),
    ("nested-fold-circles", include_str!("../scenarios/nested-fold-circles.toml")),
    ("cylinder-4-folds", include_str!("../scenarios/cylinder-4-folds.toml")),
    ("cylinder-degree-2", include_str!("../scenarios/cylinder-degree-2.toml")),
    ("cylinder-fold-degree-1", include_str!("../scenarios/cylinder-fold-degree-1.toml")),
    ("sphere-target-fold", include_str!("../scenarios/sphere-target-fold.toml")),
    ("hyperbolic-target-fold", include_str!("../scenarios/hyperbolic-target-fold.toml")),
    ("cusp-on-cylinder", include_str!("../scenarios/cusp-on-cylinder.toml")),
    ("warped-cylinder-degree-2", include_str!("../scenarios/warped-cylinder-degree-2.toml")),
];

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinInfo {
    pub name: String,
    pub summary: String,
    pub theorems: Vec<Identity>,
}

/// Name, summary and declared identities of every built-in scenario.
pub fn list() -> Vec<BuiltinInfo> {
    let mut out: Vec<BuiltinInfo> = REGISTRY
        .iter()
        .map(|(_, text)| {
            let cfg = ScenarioConfig::from_toml(text).expect("built-in scenarios parse");
            BuiltinInfo { name: cfg.name, summary: cfg.summary, theorems: cfg.theorems }
        })
        .collect();
    out.push(BuiltinInfo { name: FUZZ.into(), summary: FUZZ_SUMMARY.into(), theorems: vec![Identity::Gb2] });
    out
}

/// The named built-in scenario; `seed` only matters for the randomized one.
pub fn get(name: &str, seed: u64) -> Option<ScenarioConfig> {
    if name == FUZZ {
        return Some(fuzz_config(seed));
    }
    REGISTRY
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ScenarioConfig::from_toml(text).expect("built-in scenarios parse"))
}

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    (rng.random_range(-FUZZ_AMPLITUDE..FUZZ_AMPLITUDE) * 1e4).round() / 1e4
}

/// `(u + a sin 2πv + c sin 2π(u+v), v + b sin 2πu + d sin 2π(u-v))` on the
/// unit disk with coefficients drawn from `seed`.
pub fn fuzz_config(seed: u64) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [a, b, c, d] = [(); 4].map(|_| coefficient(&mut rng));
    ScenarioConfig {
        name: format!("{FUZZ}-{seed}"),
        summary: FUZZ_SUMMARY.into(),
        theorems: vec![Identity::Gb2],
        tolerance: None,
        resolution: None,
        quad_tolerance: None,
        map: MapConfig {
            x: format!("u + {a}*sin(2*pi*v) + {c}*sin(2*pi*(u + v))"),
            y: format!("v + {b}*sin(2*pi*u) + {d}*sin(2*pi*(u - v))"),
        },
        target: TargetConfig::default(),
        domain: DomainConfig::Disk { outer: LoopConfig::circle(0.0, 0.0, 1.0, true), holes: vec![] },
        target_domain: None,
        output: OutputConfig::default(),
    }
}

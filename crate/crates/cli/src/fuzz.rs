use serde::Serialize;
use singauss::theorems::Identity;

use crate::builtins::fuzz_config;
use crate::runner::{run_batch, Overrides, ScenarioRun, Status};

/// Residual threshold for randomized maps, looser than the per-scenario default.
pub const FUZZ_TOLERANCE: f64 = 1e-2 * std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum FuzzOutcome {
    Pass { residual: f64 },
    Fail { reason: String },
    /// The map violates a hypothesis (degenerate point, tangency, ...).
    Rejected { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzEntry {
    pub seed: u64,
    pub map: [String; 2],
    #[serde(flatten)]
    pub outcome: FuzzOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzSummary {
    pub count: usize,
    pub passed: usize,
    pub failed: usize,
    pub rejected: usize,
    pub rejection_rate: f64,
    pub entries: Vec<FuzzEntry>,
}

impl FuzzSummary {
    pub fn status(&self) -> Status {
        if self.failed > 0 {
            Status::IdentityFailure
        } else {
            Status::Pass
        }
    }
}

fn classify(run: &ScenarioRun) -> FuzzOutcome {
    if let Some(f) = run.failures.iter().max_by_key(|f| f.status) {
        let reason = format!("{}: {}", f.stage.map_or("config".into(), |s| s.to_string()), f.message);
        return match f.status {
            Status::HypothesisViolation => FuzzOutcome::Rejected { reason },
            _ => FuzzOutcome::Fail { reason },
        };
    }
    match run.report(Identity::Gb2) {
        Some(r) if r.pass => FuzzOutcome::Pass { residual: r.residual },
        Some(r) => FuzzOutcome::Fail { reason: format!("GB2 residual {:.3e}", r.residual) },
        None => FuzzOutcome::Fail { reason: "no GB2 report".into() },
    }
}

/// Check GB2 on `count` random maps with seeds `seed, seed + 1, ...`.
pub fn fuzz(count: usize, seed: u64, overrides: Overrides) -> (FuzzSummary, Vec<ScenarioRun>) {
    let overrides = Overrides { tolerance: overrides.tolerance.or(Some(FUZZ_TOLERANCE)), ..overrides };
    let seeds: Vec<u64> = (0..count as u64).map(|i| seed.wrapping_add(i)).collect();
    let runs = run_batch(seeds.iter().map(|&s| fuzz_config(s)).collect(), overrides);
    let entries: Vec<FuzzEntry> = seeds
        .iter()
        .zip(&runs)
        .map(|(&seed, run)| FuzzEntry {
            seed,
            map: [run.config.map.x.clone(), run.config.map.y.clone()],
            outcome: classify(run),
        })
        .collect();
    let tally = |f: fn(&FuzzOutcome) -> bool| entries.iter().filter(|e| f(&e.outcome)).count();
    let passed = tally(|o| matches!(o, FuzzOutcome::Pass { .. }));
    let failed = tally(|o| matches!(o, FuzzOutcome::Fail { .. }));
    let rejected = tally(|o| matches!(o, FuzzOutcome::Rejected { .. }));
    let summary = FuzzSummary {
        count,
        passed,
        failed,
        rejected,
        rejection_rate: if count == 0 { 0.0 } else { rejected as f64 / count as f64 },
        entries,
    };
    (summary, runs)
}

use std::time::{Duration, Instant};

use serde::Serialize;
use singauss::theorems::{analyze, check, Analysis, Failure, Identity, Scenario, Stage, TheoremReport};
use singauss::ErrorClass;

use crate::config::{ConfigError, ScenarioConfig};

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub resolution: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(t) = self.tolerance {
            cfg.tolerance = Some(t);
        }
        if let Some(r) = self.resolution {
            cfg.resolution = Some(r);
        }
    }
}

/// Outcome severity, ordered so that the worst one wins in a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    IdentityFailure,
    HypothesisViolation,
    ConfigurationError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::IdentityFailure => 1,
            Status::HypothesisViolation => 2,
            Status::ConfigurationError => 3,
        }
    }

    fn of_class(class: ErrorClass) -> Self {
        match class {
            ErrorClass::Configuration => Status::ConfigurationError,
            ErrorClass::Hypothesis => Status::HypothesisViolation,
            ErrorClass::Numerical => Status::IdentityFailure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    /// `None` when the shared analysis failed before any identity was assembled.
    pub identity: Option<Identity>,
    pub stage: Option<Stage>,
    pub status: Status,
    pub message: String,
}

impl FailureRecord {
    fn from_failure(identity: Option<Identity>, f: &Failure) -> Self {
        FailureRecord {
            identity,
            stage: Some(f.stage),
            status: Status::of_class(f.error.class()),
            message: f.error.to_string(),
        }
    }

    fn from_config(e: &ConfigError) -> Self {
        FailureRecord { identity: None, stage: None, status: Status::ConfigurationError, message: e.to_string() }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub scenario: Option<Scenario>,
    pub analysis: Option<Analysis>,
    pub reports: Vec<TheoremReport>,
    pub failures: Vec<FailureRecord>,
    pub elapsed: Duration,
}

impl ScenarioRun {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn status(&self) -> Status {
        let failed = self.reports.iter().any(|r| !r.pass);
        let worst = self.failures.iter().map(|f| f.status).max().unwrap_or(Status::Pass);
        worst.max(if failed { Status::IdentityFailure } else { Status::Pass })
    }

    pub fn report(&self, id: Identity) -> Option<&TheoremReport> {
        self.reports.iter().find(|r| r.identity == id)
    }
}

/// Build, analyze and check one scenario.
pub fn run_config(mut cfg: ScenarioConfig, overrides: Overrides) -> ScenarioRun {
    let start = Instant::now();
    overrides.apply(&mut cfg);
    let mut run = ScenarioRun {
        config: cfg,
        scenario: None,
        analysis: None,
        reports: Vec::new(),
        failures: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let scenario = match run.config.build() {
        Ok(s) => s,
        Err(e) => {
            run.failures.push(FailureRecord::from_config(&e));
            run.elapsed = start.elapsed();
            return run;
        }
    };
    match analyze(&scenario) {
        Ok(a) => {
            for &id in &run.config.theorems {
                match check(id, &scenario, &a) {
                    Ok(r) => run.reports.push(r),
                    Err(f) => run.failures.push(FailureRecord::from_failure(Some(id), &f)),
                }
            }
            run.analysis = Some(a);
        }
        Err(f) => run.failures.push(FailureRecord::from_failure(None, &f)),
    }
    run.scenario = Some(scenario);
    run.elapsed = start.elapsed();
    run
}

/// Run independent scenarios on all available cores, keeping input order.
pub fn run_batch(configs: Vec<ScenarioConfig>, overrides: Overrides) -> Vec<ScenarioRun> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(configs.len().max(1));
    let jobs: Vec<(usize, ScenarioConfig)> = configs.into_iter().enumerate().collect();
    let queue = std::sync::Mutex::new(jobs.into_iter());
    let results = std::sync::Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let next = queue.lock().expect("queue lock").next();
                let Some((i, cfg)) = next else { break };
                let run = run_config(cfg, overrides);
                results.lock().expect("results lock").push((i, run));
            });
        }
    });
    let mut out = results.into_inner().expect("results lock");
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, r)| r).collect()
}

/// Worst status over a batch.
pub fn batch_status(runs: &[ScenarioRun]) -> Status {
    runs.iter().map(ScenarioRun::status).max().unwrap_or(Status::Pass)
}

use std::f64::consts::TAU;
use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::mapcore::{PlanarDomain, SurfaceMap};
use crate::quad::QuadOptions;
use crate::singular::{
    classify_kind, classify_points, trace_singular_set, transversality_check, KindReport, SecondKindPoint,
    SingularPointRecord, SingularSet, TraceOptions,
};
use crate::topo::{build_decomposition, RegionDecomposition};

/// Numerical settings of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioOptions {
    /// Grid resolution used to seed the tracing of `Σ`.
    pub resolution: usize,
    /// Pass threshold for the integral identities.
    pub tolerance: f64,
    /// Absolute tolerance of each integral.
    pub quad: QuadOptions,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions { resolution: 64, tolerance: 1e-3 * TAU, quad: QuadOptions::new(1e-8, 200_000) }
    }
}

/// A map `f: M -> N` with everything the identities need.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub map: SurfaceMap,
    pub domain: PlanarDomain,
    /// `N` in target chart coordinates; required by the degree identity.
    pub target_domain: Option<PlanarDomain>,
    pub options: ScenarioOptions,
}

impl Scenario {
    pub fn new(name: impl Into<String>, map: SurfaceMap, domain: PlanarDomain) -> Self {
        Scenario { name: name.into(), map, domain, target_domain: None, options: ScenarioOptions::default() }
    }

    pub fn with_target_domain(mut self, target: PlanarDomain) -> Self {
        self.target_domain = Some(target);
        self
    }

    pub fn with_options(mut self, options: ScenarioOptions) -> Self {
        self.options = options;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Trace,
    Classify,
    Integrate,
    Decompose,
    Degree,
    Assemble,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Trace => "trace",
            Stage::Classify => "classify",
            Stage::Integrate => "integrate",
            Stage::Decompose => "decompose",
            Stage::Degree => "degree",
            Stage::Assemble => "assemble",
        };
        f.write_str(s)
    }
}

/// A pipeline error tagged with the stage that raised it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage: {error}")]
pub struct Failure {
    pub stage: Stage,
    #[source]
    pub error: Error,
}

pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, Failure>;
}

impl<T> AtStage<T> for crate::error::Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, Failure> {
        self.map_err(|error| Failure { stage, error })
    }
}

/// Traced, classified and decomposed singular data shared by all identities.
#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub set: SingularSet,
    pub kinds: Vec<KindReport>,
    pub second_kind: Vec<SecondKindPoint>,
    pub points: Vec<SingularPointRecord>,
    pub decomposition: RegionDecomposition,
}

impl Analysis {
    /// Second-kind parameters on component `i`.
    pub fn second_kind_sigmas(&self, i: usize) -> Vec<f64> {
        self.second_kind.iter().filter(|s| s.component == i).map(|s| s.sigma).collect()
    }
}

/// Trace `Σ`, check the standing hypotheses, classify its distinguished
/// points and cut `M` into faces.
pub fn analyze(s: &Scenario) -> std::result::Result<Analysis, Failure> {
    let opts = TraceOptions { resolution: s.options.resolution, step: None };
    let set = trace_singular_set(&s.map, &s.domain, opts).at(Stage::Trace)?;
    transversality_check(&set, false).at(Stage::Trace)?;
    let kinds = set
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| classify_kind(&s.map, c, i, set.step))
        .collect::<crate::error::Result<Vec<_>>>()
        .at(Stage::Classify)?;
    let second_kind: Vec<SecondKindPoint> = kinds.iter().flat_map(|k| k.second_kind.iter().copied()).collect();
    let points = classify_points(&s.map, &s.domain, &set, &second_kind).at(Stage::Classify)?;
    let decomposition = build_decomposition(&s.map, &s.domain, &set, &second_kind).at(Stage::Decompose)?;
    Ok(Analysis { set, kinds, second_kind, points, decomposition })
}

//! Error type shared by every stage of the pipeline.

use thiserror::Error;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input: bad expressions, bad chart data, bad domain data.
    Configuration,
    /// The map or domain violates a hypothesis of the identities.
    Hypothesis,
    /// A numerical routine could not reach a trustworthy answer.
    Numerical,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain violation evaluating `{expr}`")]
    DomainViolation { expr: String },

    #[error("metric is degenerate at ({x}, {y}): EG - F^2 = {det}")]
    MetricDegenerate { x: f64, y: f64, det: f64 },

    #[error("point ({x}, {y}) leaves the target chart")]
    ChartExit { x: f64, y: f64 },

    #[error("supplied curvature disagrees with the metric at ({x}, {y}): {supplied} vs {computed}")]
    CurvatureMismatch { x: f64, y: f64, supplied: f64, computed: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("derivative has rank 0 at ({u}, {v})")]
    RankZero { u: f64, v: f64 },

    #[error("derivative has full rank at ({u}, {v}); not a singular point")]
    NotSingular { u: f64, v: f64 },

    #[error("degenerate singular point near ({u}, {v}): |dlambda| = {grad}")]
    Degenerate { u: f64, v: f64, grad: f64 },

    #[error("non-admissible singular point of the second kind near ({u}, {v})")]
    NonAdmissible { u: f64, v: f64 },

    #[error("second-kind point reached at ({u}, {v}); integrate up to it, not through it")]
    SecondKindPoint { u: f64, v: f64 },

    #[error("singular set is not transversal to the boundary at {points:?}")]
    TransversalityViolation { points: Vec<(f64, f64)> },

    #[error("singular set meets the boundary at {count} point(s); the rotation-index identity needs it disjoint")]
    SingularMeetsBoundary { count: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("sector angle {value} is not within snap tolerance of a multiple of pi at ({u}, {v})")]
    NonLattice { value: f64, u: f64, v: f64 },

    #[error("boundary sign classifiers disagree at ({u}, {v}): angles say {angle}, null ray says {ray}")]
    EstimatorDisagreement { u: f64, v: f64, angle: String, ray: String },

    #[error("invalid quadrature request: {0}")]
    InvalidRequest(String),

    #[error("boundary tangent is killed by df at ({u}, {v}) away from any singular crossing")]
    SingularBoundaryTangent { u: f64, v: f64 },

    #[error("quadrature budget exhausted (error estimate {estimate:e})")]
    BudgetExceeded { estimate: f64 },

    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },

    #[error("curve velocity vanishes")]
    ZeroVelocity,

    #[error("tangent vanishes along the curve")]
    VanishingTangent,

    #[error("winding {value} is not an integer")]
    NonInteger { value: f64 },

    #[error("rotation index estimates disagree: {first} vs {second}")]
    IndexDisagreement { first: f64, second: f64 },

    #[error("could not find a regular value away from the critical image")]
    ValueTooCloseToCritical,

    #[error("degree cross-check failed: {0}")]
    CrossCheckMismatch(String),

    #[error("region decomposition inconsistent: {0}")]
    InconsistentDecomposition(String),

    #[error("curve tracing failed: {0}")]
    Tracing(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Syntax { .. }
            | UnknownIdentifier { .. }
            | MetricDegenerate { .. }
            | CurvatureMismatch { .. }
            | InvalidDomain(_)
            | InvalidRequest(_) => ErrorClass::Configuration,
            DomainViolation { .. }
            | ChartExit { .. }
            | RankZero { .. }
            | NotSingular { .. }
            | Degenerate { .. }
            | NonAdmissible { .. }
            | TransversalityViolation { .. }
            | SingularMeetsBoundary { .. }
            | Hypothesis(_) => ErrorClass::Hypothesis,
            _ => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

mod identities;
mod report;
mod scenario;

pub use identities::{check, gb1, gb2, levine, qfi, run, PointCounts, QfiForms};
pub use report::{Diagnostics, EulerSummary, Identity, Provenance, Term, TheoremReport};
pub use scenario::{analyze, Analysis, Failure, Scenario, ScenarioOptions, Stage};

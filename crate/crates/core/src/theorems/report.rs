use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::singular::SingularPointRecord;
use crate::topo::{DecompositionCounts, EulerSelector, RegionDecomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Identity {
    #[serde(rename = "GB1")]
    Gb1,
    #[serde(rename = "GB2")]
    Gb2,
    #[serde(rename = "LEVINE")]
    Levine,
    #[serde(rename = "QFI")]
    Qfi,
}

impl Identity {
    pub const ALL: [Identity; 4] = [Identity::Gb1, Identity::Gb2, Identity::Levine, Identity::Qfi];
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Identity::Gb1 => "GB1",
            Identity::Gb2 => "GB2",
            Identity::Levine => "LEVINE",
            Identity::Qfi => "QFI",
        })
    }
}

impl FromStr for Identity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "GB1" => Ok(Identity::Gb1),
            "GB2" => Ok(Identity::Gb2),
            "LEVINE" => Ok(Identity::Levine),
            "QFI" => Ok(Identity::Qfi),
            _ => Err(format!("unknown identity `{s}` (expected GB1, GB2, LEVINE or QFI)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Integral,
    IntegerCount,
    Angle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
    pub error: f64,
    pub provenance: Provenance,
}

impl Term {
    pub fn new(name: impl Into<String>, value: f64, error: f64, provenance: Provenance) -> Self {
        Term { name: name.into(), value, error, provenance }
    }

    pub fn count(name: impl Into<String>, value: f64) -> Self {
        Term::new(name, value, 0.0, Provenance::IntegerCount)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EulerSummary {
    pub m: i64,
    pub closure_plus: i64,
    pub closure_minus: i64,
    pub open_plus: i64,
    pub open_minus: i64,
    pub sigma: i64,
    pub crossings: usize,
}

impl EulerSummary {
    pub fn of(dec: &RegionDecomposition) -> Self {
        EulerSummary {
            m: dec.euler_characteristic(EulerSelector::M),
            closure_plus: dec.euler_characteristic(EulerSelector::ClosurePlus),
            closure_minus: dec.euler_characteristic(EulerSelector::ClosureMinus),
            open_plus: dec.euler_characteristic(EulerSelector::OpenPlus),
            open_minus: dec.euler_characteristic(EulerSelector::OpenMinus),
            sigma: dec.euler_characteristic(EulerSelector::Sigma),
            crossings: dec.crossing_count(),
        }
    }

    /// `2χ(cl M+) = 2χ(M) - 2χ(cl M-) + #(Σ ∩ ∂M)`.
    pub fn closure_relation_holds(&self) -> bool {
        2 * self.closure_plus == 2 * self.m - 2 * self.closure_minus + self.crossings as i64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub points: Vec<SingularPointRecord>,
    pub decomposition: DecompositionCounts,
    pub euler: EulerSummary,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub identity: Identity,
    pub scenario: String,
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
    pub lhs_total: f64,
    pub rhs_total: f64,
    pub residual: f64,
    pub residual_over_2pi: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub diagnostics: Diagnostics,
}

impl TheoremReport {
    pub(crate) fn assemble(
        identity: Identity,
        scenario: &str,
        lhs: Vec<Term>,
        rhs: Vec<Term>,
        tolerance: f64,
        diagnostics: Diagnostics,
    ) -> Self {
        let lhs_total: f64 = lhs.iter().map(|t| t.value).sum();
        let rhs_total: f64 = rhs.iter().map(|t| t.value).sum();
        let residual = (lhs_total - rhs_total).abs();
        TheoremReport {
            identity,
            scenario: scenario.to_string(),
            lhs,
            rhs,
            lhs_total,
            rhs_total,
            residual,
            residual_over_2pi: residual / TAU,
            tolerance,
            pass: residual <= tolerance,
            diagnostics,
        }
    }
}

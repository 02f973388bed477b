use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use singauss::quad::QuadOptions;
use singauss::theorems::{Identity, Scenario, ScenarioOptions};
use singauss::{BoundaryLoop, ChartRegion, MetricChart, PlanarDomain, SurfaceMap, Vars};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("scenario `{scenario}`: {field}: {source}")]
    Parse {
        scenario: String,
        field: String,
        #[source]
        source: singauss::Error,
    },
    #[error("scenario `{scenario}`: {message}")]
    Invalid { scenario: String, message: String },
}

/// A number, or a constant expression such as `"2*pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    fn eval(&self) -> singauss::Result<f64> {
        match self {
            Number::Value(x) => Ok(*x),
            Number::Expr(s) => singauss::parse(s, &Vars::new(&["_"]))?.eval(&[0.0]),
        }
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Value(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub x: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionConfig {
    Rect { x0: Number, x1: Number, y0: Number, y1: Number },
    Disk { cx: Number, cy: Number, r: Number },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(rename = "E")]
    pub e: String,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "G")]
    pub g: String,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig { e: "1".into(), f: "0".into(), g: "1".into(), k: None, region: None, period: None }
    }
}

/// A closed boundary curve `t -> (u(t), v(t))`, oriented with the domain on its left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub u: String,
    pub v: String,
    pub t0: Number,
    pub t1: Number,
}

impl LoopConfig {
    pub fn circle(cx: f64, cy: f64, r: f64, ccw: bool) -> Self {
        let v = if ccw { format!("{cy} + {r}*sin(t)") } else { format!("{cy} - {r}*sin(t)") };
        LoopConfig { u: format!("{cx} + {r}*cos(t)"), v, t0: 0.0.into(), t1: Number::Expr("2*pi".into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainConfig {
    /// Bounded region: one outer loop and optional holes.
    Disk {
        outer: LoopConfig,
        #[serde(default)]
        holes: Vec<LoopConfig>,
    },
    /// Periodic in `u`: lower and upper boundary curves and optional holes.
    Strip {
        period: f64,
        lower: LoopConfig,
        upper: LoopConfig,
        #[serde(default)]
        holes: Vec<LoopConfig>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub summary: String,
    pub theorems: Vec<Identity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tolerance: Option<f64>,
    pub map: MapConfig,
    #[serde(default)]
    pub target: TargetConfig,
    pub domain: DomainConfig,
    /// `N` in target coordinates, needed by the degree identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_domain: Option<DomainConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }

    fn parse_err(&self, field: &str) -> impl Fn(singauss::Error) -> ConfigError + '_ {
        let field = field.to_string();
        move |source| ConfigError::Parse { scenario: self.name.clone(), field: field.clone(), source }
    }

    fn invalid(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { scenario: self.name.clone(), message: message.into() }
    }

    fn build_loop(&self, field: &str, l: &LoopConfig) -> Result<BoundaryLoop, ConfigError> {
        let err = self.parse_err(field);
        let t0 = l.t0.eval().map_err(&err)?;
        let t1 = l.t1.eval().map_err(&err)?;
        BoundaryLoop::from_strings(&l.u, &l.v, t0, t1).map_err(err)
    }

    fn build_domain(&self, field: &str, d: &DomainConfig) -> Result<PlanarDomain, ConfigError> {
        let holes = |hs: &[LoopConfig]| -> Result<Vec<BoundaryLoop>, ConfigError> {
            hs.iter().enumerate().map(|(i, h)| self.build_loop(&format!("{field}.holes[{i}]"), h)).collect()
        };
        match d {
            DomainConfig::Disk { outer, holes: hs } => {
                PlanarDomain::disk(self.build_loop(&format!("{field}.outer"), outer)?, holes(hs)?)
            }
            DomainConfig::Strip { period, lower, upper, holes: hs } => PlanarDomain::strip(
                *period,
                self.build_loop(&format!("{field}.lower"), lower)?,
                self.build_loop(&format!("{field}.upper"), upper)?,
                holes(hs)?,
            ),
        }
        .map_err(self.parse_err(field))
    }

    fn build_region(&self) -> Result<ChartRegion, ConfigError> {
        let err = self.parse_err("target.region");
        Ok(match &self.target.region {
            None => ChartRegion::everywhere(),
            Some(RegionConfig::Rect { x0, x1, y0, y1 }) => ChartRegion::Rect {
                x0: x0.eval().map_err(&err)?,
                x1: x1.eval().map_err(&err)?,
                y0: y0.eval().map_err(&err)?,
                y1: y1.eval().map_err(&err)?,
            },
            Some(RegionConfig::Disk { cx, cy, r }) => {
                ChartRegion::Disk { cx: cx.eval().map_err(&err)?, cy: cy.eval().map_err(&err)?, r: r.eval().map_err(&err)? }
            }
        })
    }

    /// Parse every expression, build the scenario and check that each
    /// requested identity has what it needs.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        if self.theorems.is_empty() {
            return Err(self.invalid("no theorems requested"));
        }
        let t = &self.target;
        let chart = MetricChart::from_strings(&t.e, &t.f, &t.g, self.build_region()?, t.period, t.k.as_deref())
            .map_err(self.parse_err("target"))?;
        if self.theorems.contains(&Identity::Levine) && !chart.is_flat() {
            return Err(self.invalid("LEVINE needs a flat target metric"));
        }
        let map = SurfaceMap::from_strings(&self.map.x, &self.map.y, chart).map_err(self.parse_err("map"))?;
        let domain = self.build_domain("domain", &self.domain)?;
        let mut scenario = Scenario::new(&self.name, map, domain);
        match &self.target_domain {
            Some(d) => scenario = scenario.with_target_domain(self.build_domain("target_domain", d)?),
            None if self.theorems.contains(&Identity::Qfi) => {
                return Err(self.invalid("QFI needs a target_domain"));
            }
            None => {}
        }
        let mut options = ScenarioOptions::default();
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(self.invalid(format!("tolerance must be positive, got {tol}")));
            }
            options.tolerance = tol;
        }
        if let Some(r) = self.resolution {
            if r < 8 {
                return Err(self.invalid(format!("resolution must be at least 8, got {r}")));
            }
            options.resolution = r;
        }
        if let Some(q) = self.quad_tolerance {
            options.quad = QuadOptions { tol: q, ..options.quad };
            options.quad.validate().map_err(self.parse_err("quad_tolerance"))?;
        }
        Ok(scenario.with_options(options))
    }

    /// Tolerance in units of `2π`, for display.
    pub fn tolerance_over_2pi(&self) -> f64 {
        self.tolerance.unwrap_or(ScenarioOptions::default().tolerance) / TAU
    }
}

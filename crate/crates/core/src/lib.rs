pub mod error;
pub mod expr;
pub mod geom;
pub mod mapcore;
pub mod quad;
pub mod singular;
pub mod theorems;
pub mod topo;
pub mod surface;

pub use error::{Error, ErrorClass, Result};
pub use expr::{parse, Expr, Func, Tape, Vars};
pub use geom::{Mat2, Vec2};
pub use mapcore::{BoundaryLoop, DomainKind, MapJet, PlanarDomain, SurfaceMap};
pub use surface::{ChartRegion, Christoffel, MetricChart, MetricJet};

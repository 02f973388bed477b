//! The map `f: M -> N` and its planar domain `M`.

mod domain;
mod map;

pub use domain::{BoundaryLoop, DomainKind, PlanarDomain};
pub use map::{rank_tolerance, MapJet, SurfaceMap};

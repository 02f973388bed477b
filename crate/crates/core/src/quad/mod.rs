//! Adaptive quadrature: curve integrals, region integrals over `M` and the
//! curvature measures entering the identities.

mod curve;
mod measures;
mod region;

pub use curve::{integrate_curve, Estimate, QuadOptions};
pub use measures::{
    boundary_geodesic_term, boundary_geodesic_terms, singular_curvature_integral, BoundaryCombination,
};
pub use region::{integrate_density, integrate_region, RegionMode};

//! The singular set `Σ = {λ = 0}`: tracing, kinds, singular curvature,
//! sector angles and sign classes.

mod angles;
mod classify;
mod curvature;
mod kind;
mod trace;

pub use angles::{angles_at_radius, lattice, sector_angles, AngleEstimate, RadiusSample, Side, Site};
pub use classify::{
    classify_interior, classify_points, transversality_check, PointKind, SignClass, SingularPointRecord, Stratum,
    DIRECTION_TOL, SNAP_TOL, TRANSVERSALITY_FLOOR,
};
pub use curvature::{level_curve_jet, singular_curvature, singular_frame, SingularFrame};
pub use kind::{classify_kind, KindReport, SecondKindPoint, KIND_TOL};
pub(crate) use trace::bracket_root;
pub use trace::{
    advance, boundary_crossings, project, tangent, trace_singular_set, BoundaryCrossing, SingularComponent,
    SingularSample, SingularSet, Topology, TraceOptions, LAMBDA_TOL, NONDEGENERACY_FLOOR,
};

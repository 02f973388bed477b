//! Region decomposition of `M` by `Σ`, Euler characteristics, rotation
//! indices and mapping degree.

mod decomposition;
mod degree;
mod rotation;

pub use decomposition::{
    build_decomposition, DecompositionCounts, Edge, EdgeKind, EulerSelector, Face, RegionDecomposition, Vertex,
    VertexKind,
};
pub use degree::{check_boundary_compatibility, mapping_degree, DegreeOptions, DegreeReport, PreimageCount};
pub use rotation::{rotation_index, turning_number, INDEX_TOL};

//! Geometric kernel for supercyclidic nets.
//!
//! The crate builds up in layers: homogeneous projective primitives, lattice
//! Q-nets, torsal line systems over them, conic boundary arcs and SC-patches,
//! multidimensional SC-nets with their transforms, and reflection fields
//! between adjacent vertex frames. Every routine is generic over the scalar
//! backend: `f64` for fast runs, `BigRational` for exact ones.

pub mod conic;
pub mod error;
pub mod gen;
pub mod lattice;
pub mod linalg;
pub mod patch;
pub mod projective;
pub mod qnet;
pub mod reflect;
pub mod scalar;
pub mod scnet;
pub mod torsal;

pub use conic::{
    arc_from_tangents_and_point, arc_tangent_at, eval_arc, eval_arc_strict, map_arc,
    subdivide_arc, ConicArc,
};
pub use error::{GeomError, Result, Site};
pub use patch::{build_adapted_patch, QuadraticCone, SCPatch};
pub use lattice::{LatticeBox, LatticeMap};
pub use projective::{
    central_projection, cross_ratio, harmonic_conjugate, join_elements, lines_intersect,
    meet_elements, meet_line_plane, meet_planes, meet_three_planes, plane_point_line,
    plane_through_points, projective_reflection, CrossRatio, GeoElement, HPlane, HPoint, PLine,
    ProjMap, ProjReflection, Subspace,
};
pub use qnet::{
    complete_qcube, is_ftransform_pair, is_planar_quad, laplace_point, planar_quad_residual,
    propagate_qnet, QNet,
};
pub use reflect::{
    lemma_codim2_witness, propagate_reflection_field, propagate_reflections,
    propagate_reflections_with_frame, reflection_between_frames, Codim2Report, Frame,
    ReflectionField,
};
pub use scalar::{Scalar, Tol, DEFAULT_TOL};
pub use scnet::{
    complete_sc_cube, cube_family_patch, is_ftransform_scnet_pair, propagate_scnet,
    propagate_scnet_2d, propagate_scnet_axes, refine_scnet, sc_ftransform, transport_arc,
    uniform_grid, validate_scnet, CheckItem, FTransformCauchy, SCCube, SCNet, ScnetCauchy,
    ValidationReport,
};
pub use torsal::{
    extend_qnet_lines, extend_quad_lines, inscribe_quad, is_fundamental_cube, lift_complex_cube,
    project_lifted_cube, CubeLines, FundamentalCheck, LiftedCube, LineSystem,
};

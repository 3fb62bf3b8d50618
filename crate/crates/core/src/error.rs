//! Error type shared by the geometric kernel.
//!
//! Degeneracies are reported, never silently patched. Sweep operations wrap
//! the underlying failure in [`GeomError::At`] carrying the lattice site so
//! callers (and the CLI) can point at the offending cell.

use std::fmt;
use thiserror::Error;

/// A lattice location: vertex index plus the directions of the cell/edge
/// involved, e.g. `z=(1,0,2) dirs=(1,3)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Site {
    pub index: Vec<usize>,
    pub dirs: Vec<usize>,
}

impl Site {
    pub fn vertex(index: &[usize]) -> Self {
        Site { index: index.to_vec(), dirs: vec![] }
    }

    pub fn cell(index: &[usize], dirs: &[usize]) -> Self {
        Site { index: index.to_vec(), dirs: dirs.to_vec() }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z=(")?;
        for (i, v) in self.index.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")?;
        if !self.dirs.is_empty() {
            write!(f, " dirs=(")?;
            for (i, d) in self.dirs.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                // directions are reported 1-based to match net notation
                write!(f, "{}", d + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Error, Debug)]
pub enum GeomError {
    // projective core
    #[error("degenerate span: operands are linearly dependent")]
    DegenerateSpan,
    #[error("non-generic meet: intersection has unexpected dimension")]
    NonGenericMeet,
    #[error("coincident lines have no unique intersection point")]
    CoincidentLines,
    #[error("cross-ratio arguments are not collinear")]
    NotCollinear,
    #[error("cross-ratio undefined: repeated points give 0/0")]
    UndefinedCrossRatio,
    #[error("projection center lies on the target plane")]
    CenterOnTarget,
    #[error("reflection center lies on the mirror")]
    CenterOnMirror,
    #[error("projective map annihilates the point")]
    MapAnnihilatesPoint,
    #[error("projective map is singular; inverse/plane action undefined")]
    NonInvertibleMap,
    #[error("zero homogeneous vector")]
    ZeroVector,

    // lattice / Q-nets
    #[error("lattice extents mismatch: {0}")]
    BoxMismatch(String),
    #[error("index out of lattice bounds")]
    IndexOutOfBounds,
    #[error("cube completion: the three face planes share a line (pencil)")]
    DegeneratePencil,
    #[error("cube completion: an input face is not planar")]
    NonPlanarInput,
    #[error("inconsistent Cauchy data: {0}")]
    InconsistentCauchyData(String),
    #[error("degenerate quad (collinear or repeated vertices)")]
    DegenerateQuad,
    #[error("laplace point undefined: opposite edges coincide")]
    ParallelCoincidentEdges,

    // torsal line systems
    #[error("neighboring lines are skew, system is not torsal")]
    SkewNeighbors,
    #[error("line lies inside the vertex plane; inscribed point not unique")]
    LineInPlane,
    #[error("input lines do not intersect the base line")]
    NonIntersectingInput,
    #[error("the two extension planes coincide; line not determined")]
    CoplanarDegeneracy,
    #[error("degenerate line cube (repeated focal points or planes)")]
    NonGenericCube,
    #[error("line cube is not fundamental")]
    NotFundamental,
    #[error("lift construction degenerated")]
    DegenerateLift,

    // conic arcs / patches
    #[error("arc parameter {0} outside [0,1]")]
    ParameterOutOfRange(f64),
    #[error("point lies on a tangent line; conic weight undefined")]
    PointOnTangent,
    #[error("point does not lie in the arc plane")]
    NonCoplanarPoint,
    #[error("interior point selects the complementary conic branch (w = {0})")]
    NegativeWeightBranch(f64),
    #[error("projective map annihilates a control point")]
    ControlPointAnnihilated,
    #[error("transported arc crosses the vanishing plane (w0*w2 < 0)")]
    NegativeWeightProduct,
    #[error("tangent chain broken: required tangent lines do not intersect")]
    TangentChainBroken,
    #[error("laplace point lies on a boundary plane")]
    LaplacePointOnBoundaryPlane,
    #[error("degenerate meet while evaluating patch interior")]
    DegenerateMeet,
    #[error("degenerate sub-quad at an isoparametric parameter")]
    DegenerateSubQuad,
    #[error("tangent cone degenerates (apex undefined)")]
    DegenerateCone,

    // SC-nets
    #[error("patches do not share their common boundary: {0}")]
    CommonBoundaryViolated(String),
    #[error("supporting point cube of the SC-cube could not be completed")]
    QCubeDegenerate,
    #[error("boundary planes of one direction are not in general position")]
    NonConcurrentPlanes,
    #[error("cauchy layers disagree on shared axes: {0}")]
    IncompatibleCauchyLayers(String),
    #[error("singular configuration while traversing a cube family")]
    SingularTraversal,
    #[error("transform layer quad is not planar")]
    NonPlanarLayer,
    #[error("transform tangent does not meet the base tangent")]
    TangentMismatch,
    #[error("refinement grids do not match across a shared edge")]
    GridMismatchAcrossEdge,
    #[error("singular cell in SC-net")]
    SingularCell,

    // reflections
    #[error("focal points do not span a hyperplane")]
    FocalSpanDegenerate,
    #[error("frame base point lies on the mirror")]
    BaseOnMirror,
    #[error("auxiliary frame degenerate after {0} reseeded attempts")]
    AuxiliaryFrameDegenerate(usize),
    #[error("frame lines must pass through the base and jointly span")]
    MalformedFrame,
    #[error("propagation routes disagree")]
    RouteDisagreement,

    #[error("{site}: {source}")]
    At {
        site: Site,
        #[source]
        source: Box<GeomError>,
    },
}

impl GeomError {
    pub fn at(self, site: Site) -> GeomError {
        GeomError::At { site, source: Box::new(self) }
    }

    /// Innermost lattice site, if any.
    pub fn site(&self) -> Option<&Site> {
        match self {
            GeomError::At { site, source } => source.site().or(Some(site)),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;

//! Polyhedral cones, wedges and polyhedrons in three dimensions.
//!
//! Every domain is immutable once built. The distance functions here are
//! the raw ingredients of the mixed weights in [`crate::weights`]: distance
//! to the vertex (or vertex set), to the edges, and to the boundary.

mod builtin;
mod cone;
mod domain;
mod file;
mod polyhedron;
mod validate;
mod wedge;

pub use builtin::{builtin_domain, platonic_solid, unit_box, PlatonicSolid};
pub use cone::PolyhedralCone;
pub use domain::{Domain, HalfSpace, Location};
pub use file::{load_domain, parse_domain_json, DomainSpec};
pub use polyhedron::{Edge, Face, Polyhedron};
pub use validate::{validate_assumptions, AssumptionReport};
pub use wedge::WedgeSpec;

use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Tolerance on `|p| = 1` for cone directions.
pub const UNIT_TOL: f64 = 1e-12;
/// Angles closer than this to `π` (or to `0`, `2π`) are rejected.
pub const ANGLE_TOL: f64 = 1e-9;
/// Points this close to the boundary are classified as boundary points.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("a polyhedral cone needs at least 3 directions, got {0}")]
    TooFewDirections(usize),
    #[error("direction {index} has norm {norm}, expected a unit vector")]
    NonUnitDirection { index: usize, norm: f64 },
    #[error("face {index} is degenerate: consecutive directions are parallel or antipodal")]
    DegenerateFace { index: usize },
    #[error("boundary arcs {first} and {second} of the spherical polygon intersect")]
    SelfIntersectingPolygon { first: usize, second: usize },
    #[error("inner angle at edge {index} equals pi")]
    StraightEdge { index: usize },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("wedge angle {0} must lie in (0, 2pi) and differ from pi")]
    BadWedgeAngle(f64),
    #[error("rotation matrix is not orthogonal with determinant +1")]
    NotARotation,
    #[error("invalid polyhedron: {0}")]
    InvalidPolyhedron(String),
    #[error("assumption violated at {point:?}: {reason}")]
    AssumptionViolated { point: [f64; 3], reason: String },
    #[error("domain specification: {0}")]
    Spec(String),
}

pub(crate) fn to_array(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Distance from `x` to the closed half-line `{origin + t d : t >= 0}` (`d` unit).
pub(crate) fn dist_to_ray(x: &Vec3, origin: &Vec3, d: &Vec3) -> f64 {
    let v = x - origin;
    let t = v.dot(d).max(0.0);
    (v - t * d).norm()
}

/// Distance from `x` to the closed segment `[a, b]`.
pub(crate) fn dist_to_segment(x: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (x - a).norm();
    }
    let t = ((x - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (x - (a + t * ab)).norm()
}

/// Any unit vector orthogonal to the unit vector `n`.
pub(crate) fn orthogonal_unit(n: &Vec3) -> Vec3 {
    let trial = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let v = trial - trial.dot(n) * n;
    v.normalize()
}

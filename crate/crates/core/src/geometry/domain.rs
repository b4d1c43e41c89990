use serde::{Deserialize, Serialize};

use super::{GeometryError, PolyhedralCone, Polyhedron, Vec3, WedgeSpec, BOUNDARY_TOL};

/// Open half-space `{x : normal · x > offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec3,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec3, offset: f64) -> Result<Self, GeometryError> {
        let n = normal.norm();
        if !(n > 0.0) {
            return Err(GeometryError::Spec("half-space normal must be nonzero".into()));
        }
        Ok(HalfSpace {
            normal: normal / n,
            offset: offset / n,
        })
    }

    /// `{x3 > 0}`.
    pub fn upper() -> Self {
        HalfSpace {
            normal: Vec3::z(),
            offset: 0.0,
        }
    }

    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        self.normal.dot(x) - self.offset
    }

    /// Mirror image across the bounding plane.
    pub fn reflect(&self, x: &Vec3) -> Vec3 {
        x - 2.0 * self.signed_distance(x) * self.normal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Any domain the diffusion can be killed on.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// All of ℝ³ (no killing).
    Free,
    HalfSpace(HalfSpace),
    Wedge(WedgeSpec),
    Cone(PolyhedralCone),
    Polyhedron(Polyhedron),
}

impl Domain {
    pub fn name(&self) -> &'static str {
        match self {
            Domain::Free => "free",
            Domain::HalfSpace(_) => "half_space",
            Domain::Wedge(_) => "wedge",
            Domain::Cone(_) => "cone",
            Domain::Polyhedron(_) => "polyhedron",
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Domain::Free | Domain::HalfSpace(_) => true,
            Domain::Wedge(w) => w.is_convex(),
            Domain::Cone(c) => c.is_convex(),
            Domain::Polyhedron(p) => p.is_convex(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Domain::Polyhedron(_))
    }

    /// Open-domain membership, no boundary tolerance.
    #[inline]
    pub fn contains(&self, x: &Vec3) -> bool {
        match self {
            Domain::Free => true,
            Domain::HalfSpace(h) => h.signed_distance(x) > 0.0,
            Domain::Wedge(w) => w.contains(x),
            Domain::Cone(c) => c.contains(x),
            Domain::Polyhedron(p) => p.contains(x),
        }
    }

    /// Membership with boundary ties: points within `BOUNDARY_TOL` of `∂D`
    /// are boundary points.
    pub fn classify(&self, x: &Vec3) -> Location {
        if matches!(self, Domain::Free) {
            return Location::Inside;
        }
        if self.dist_boundary(x) <= BOUNDARY_TOL {
            Location::Boundary
        } else if self.contains(x) {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    /// Whether `x` lies in the closure of the domain.
    pub fn contains_closed(&self, x: &Vec3) -> bool {
        self.classify(x) != Location::Outside
    }

    pub fn dist_boundary(&self, x: &Vec3) -> f64 {
        match self {
            Domain::Free => f64::INFINITY,
            Domain::HalfSpace(h) => h.signed_distance(x).abs(),
            Domain::Wedge(w) => w.dist_boundary(x),
            Domain::Cone(c) => c.dist_boundary(x),
            Domain::Polyhedron(p) => p.dist_boundary(x),
        }
    }

    /// `d(x, Ê)`; infinite when the domain has no edges.
    pub fn dist_edge_set(&self, x: &Vec3) -> f64 {
        match self {
            Domain::Free | Domain::HalfSpace(_) => f64::INFINITY,
            Domain::Wedge(w) => w.dist_edge(x),
            Domain::Cone(c) => c.dist_edge_set(x),
            Domain::Polyhedron(p) => p.dist_edge_set(x),
        }
    }

    /// Distance to the vertex (cone) or nearest vertex (polyhedron).
    pub fn dist_vertex_set(&self, x: &Vec3) -> f64 {
        match self {
            Domain::Free | Domain::HalfSpace(_) | Domain::Wedge(_) => f64::INFINITY,
            Domain::Cone(c) => c.dist_vertex(x),
            Domain::Polyhedron(p) => p.dist_vertex_set(x),
        }
    }

    pub fn num_faces(&self) -> usize {
        match self {
            Domain::Free => 0,
            Domain::HalfSpace(_) => 1,
            Domain::Wedge(_) => 2,
            Domain::Cone(c) => c.num_edges(),
            Domain::Polyhedron(p) => p.faces().len(),
        }
    }

    /// Inward unit normal and offset of face `k`: the signed inward distance
    /// to its plane is `normal · x - offset`.
    #[inline]
    pub fn face_plane(&self, k: usize) -> (Vec3, f64) {
        match self {
            Domain::Free => unreachable!("free space has no faces"),
            Domain::HalfSpace(h) => (h.normal, h.offset),
            Domain::Wedge(w) => (w.face_normal(k), 0.0),
            Domain::Cone(c) => (*c.face_normal(k), 0.0),
            Domain::Polyhedron(p) => {
                let f = &p.faces()[k];
                (-f.normal, -f.offset)
            }
        }
    }

    /// Whether a point of the plane of face `k` lies on the (closed) face.
    pub fn face_contains_projection(&self, k: usize, p: &Vec3) -> bool {
        match self {
            Domain::Free => false,
            Domain::HalfSpace(_) => true,
            Domain::Wedge(w) => w.face_contains(k, p),
            Domain::Cone(c) => c.sector_contains(k, p),
            Domain::Polyhedron(poly) => poly.faces()[k].contains_projection(p),
        }
    }

    /// Whether the straight segment from `a` to `b` meets the boundary, given
    /// that both endpoints are inside.
    pub fn segment_crosses_boundary(&self, a: &Vec3, b: &Vec3) -> bool {
        if self.is_convex() {
            return false;
        }
        for k in 0..self.num_faces() {
            let (n, off) = self.face_plane(k);
            let da = n.dot(a) - off;
            let db = n.dot(b) - off;
            if (da > 0.0) == (db > 0.0) {
                continue;
            }
            let t = da / (da - db);
            let c = a + t * (b - a);
            if self.face_contains_projection(k, &c) {
                return true;
            }
        }
        false
    }
}

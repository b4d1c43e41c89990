use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::geometry::{Domain, Vec3};

/// A singular set of the boundary to approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Vertex(usize),
    Edge(usize),
    Face(usize),
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Vertex(i) => write!(f, "vertex:{i}"),
            Feature::Edge(i) => write!(f, "edge:{i}"),
            Feature::Face(i) => write!(f, "face:{i}"),
        }
    }
}

impl FromStr for Feature {
    type Err = String;

    /// `vertex:i`, `edge:i` or `face:i`; the index defaults to 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, idx) = s.split_once(':').unwrap_or((s, "0"));
        let i: usize = idx.trim().parse().map_err(|e| format!("bad feature index '{idx}': {e}"))?;
        match kind.trim() {
            "vertex" => Ok(Feature::Vertex(i)),
            "edge" => Ok(Feature::Edge(i)),
            "face" => Ok(Feature::Face(i)),
            other => Err(format!("unknown feature '{other}' (expected vertex, edge or face)")),
        }
    }
}

fn perpendicular(v: Vec3, axis: &Vec3) -> Vec3 {
    (v - axis * axis.dot(&v)).normalize()
}

/// A point `foot` on the feature and a unit direction `dir` into the domain
/// such that `foot + d dir` approaches the feature along a bisector as
/// `d → 0`. Cone edges and faces are taken at unit distance from the vertex.
pub fn approach_point(domain: &Domain, feature: Feature) -> Result<(Vec3, Vec3), VerifyError> {
    let bad = || VerifyError::BadFeature(feature.to_string());
    match (domain, feature) {
        (Domain::HalfSpace(h), Feature::Face(0)) => Ok((h.normal * h.offset, h.normal)),
        (Domain::Wedge(w), Feature::Edge(0)) => Ok((Vec3::zeros(), w.bisector())),
        (Domain::Wedge(w), Feature::Face(k)) if k < 2 => {
            let along = if k == 0 {
                w.to_global(&Vec3::x())
            } else {
                w.to_global(&Vec3::new(w.kappa().cos(), w.kappa().sin(), 0.0))
            };
            Ok((along, w.face_normal(k)))
        }
        (Domain::Cone(c), Feature::Vertex(0)) => Ok((Vec3::zeros(), c.interior_direction())),
        (Domain::Cone(c), Feature::Edge(i)) if i < c.num_edges() => {
            let n = c.num_edges();
            let p = c.directions()[i];
            let b = c.face_normal((i + n - 1) % n) + c.face_normal(i);
            Ok((p, perpendicular(b, &p)))
        }
        (Domain::Cone(c), Feature::Face(i)) if i < c.num_edges() => {
            let n = c.num_edges();
            let foot = (c.directions()[i] + c.directions()[(i + 1) % n]).normalize();
            Ok((foot, *c.face_normal(i)))
        }
        (Domain::Polyhedron(p), Feature::Vertex(i)) if i < p.vertices().len() => {
            Ok((p.vertices()[i], p.vertex_cones()[i].interior_direction()))
        }
        (Domain::Polyhedron(p), Feature::Edge(j)) if j < p.edges().len() => {
            let e = &p.edges()[j];
            let (a, b) = (p.vertices()[e.a], p.vertices()[e.b]);
            let axis = (b - a).normalize();
            let inward = -(p.faces()[e.faces[0]].normal + p.faces()[e.faces[1]].normal);
            Ok((0.5 * (a + b), perpendicular(inward, &axis)))
        }
        (Domain::Polyhedron(p), Feature::Face(k)) if k < p.faces().len() => {
            let f = &p.faces()[k];
            let c = f.vertices.iter().map(|&v| p.vertices()[v]).sum::<Vec3>() / f.vertices.len() as f64;
            Ok((c, -f.normal))
        }
        _ => Err(bad()),
    }
}

/// Largest approach distance for which the lower-dimensional singular sets
/// around the feature stay well separated from the source: a third of the
/// foot's distance to the edges for faces, half its distance to the vertices
/// for edges, and a quarter of the shortest incident edge for polyhedron
/// vertices.
pub fn approach_scale(domain: &Domain, feature: Feature, foot: &Vec3) -> f64 {
    match (domain, feature) {
        (_, Feature::Face(_)) => domain.dist_edge_set(foot) / 3.0,
        (_, Feature::Edge(_)) => 0.5 * domain.dist_vertex_set(foot),
        (Domain::Polyhedron(p), Feature::Vertex(i)) => {
            let v = p.vertices()[i];
            0.25 * p
                .vertices()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| (w - v).norm())
                .fold(f64::INFINITY, f64::min)
        }
        (_, Feature::Vertex(_)) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_domain;

    #[test]
    fn approach_directions_point_inside() {
        for name in ["octant", "cube", "tetrahedron", "quarter_space_wedge", "octant_complement"] {
            let d = builtin_domain(name).unwrap();
            for f in [Feature::Vertex(0), Feature::Edge(0), Feature::Edge(1), Feature::Face(0)] {
                let Ok((foot, dir)) = approach_point(&d, f) else { continue };
                assert!((dir.norm() - 1.0).abs() < 1e-12);
                for k in 1..6 {
                    let x = foot + 0.05 * k as f64 * dir;
                    assert!(d.contains(&x), "{name} {f}: {x:?}");
                }
            }
        }
        let oct = builtin_domain("octant").unwrap();
        let (foot, _) = approach_point(&oct, Feature::Face(0)).unwrap();
        assert!((approach_scale(&oct, Feature::Face(0), &foot) - 0.5f64.sqrt() / 3.0).abs() < 1e-12);
        assert!(approach_scale(&oct, Feature::Vertex(0), &Vec3::zeros()).is_infinite());
        assert!(approach_point(&builtin_domain("half_space").unwrap(), Feature::Vertex(0)).is_err());
        assert_eq!("edge:2".parse::<Feature>().unwrap(), Feature::Edge(2));
        assert_eq!("vertex".parse::<Feature>().unwrap(), Feature::Vertex(0));
    }
}

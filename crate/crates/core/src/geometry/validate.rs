use std::f64::consts::PI;

use serde::Serialize;

use super::{to_array, Domain, GeometryError, PolyhedralCone, Polyhedron, Vec3};
use crate::sampling::halton_ball;

/// Sampled witnesses for the local-structure radii of a domain.
///
/// `r0`: vertex/edge neighbourhoods, `r1`: edge (polyhedron) or face (cone)
/// neighbourhoods, `r2`: face neighbourhoods of a polyhedron. The values are
/// the largest dyadic radii `2^-k` that passed every sample, not maximal radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub sites: usize,
    pub samples_per_site: usize,
}

const SAMPLES: usize = 192;
const MAX_HALVINGS: i32 = 30;

/// Whether `q` lies in the wedge of `cone` along edge `i` (translation invariant along `p_i`).
fn in_edge_wedge(cone: &PolyhedralCone, i: usize, q: &Vec3) -> bool {
    let p = &cone.directions()[i];
    let (u, _) = cone.edge_tangents(i);
    let v = q - q.dot(p) * p;
    if v.norm() == 0.0 {
        return false;
    }
    let mut theta = u.cross(&v).dot(p).atan2(u.dot(&v));
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    theta > 0.0 && theta < cone.inner_angles()[i]
}

/// Largest `2^-k` such that `inside(q) == model(q)` on ball samples around
/// `center` of radius `scale * r`. Points within `tie * scale * r` of either
/// boundary are skipped.
fn largest_radius(
    center: &Vec3,
    scale: f64,
    ball: &[Vec3],
    inside: impl Fn(&Vec3) -> bool,
    model: impl Fn(&Vec3) -> bool,
    near_boundary: impl Fn(&Vec3) -> bool,
) -> Result<f64, [f64; 3]> {
    let mut last_bad = *center;
    for k in 1..=MAX_HALVINGS {
        let r = 0.5f64.powi(k);
        let mut ok = true;
        for b in ball {
            let q = center + scale * r * b;
            if near_boundary(&q) {
                continue;
            }
            if inside(&q) != model(&q) {
                ok = false;
                last_bad = q;
                break;
            }
        }
        if ok {
            return Ok(r);
        }
    }
    Err(to_array(&last_bad))
}

fn violated(point: [f64; 3], reason: &str) -> GeometryError {
    GeometryError::AssumptionViolated {
        point,
        reason: reason.to_string(),
    }
}

fn slerp(a: &Vec3, b: &Vec3, f: f64) -> Vec3 {
    ((1.0 - f) * a + f * b).normalize()
}

fn validate_cone(cone: &PolyhedralCone, ball: &[Vec3]) -> Result<AssumptionReport, GeometryError> {
    let n = cone.num_edges();
    let tie = |q: &Vec3, r: f64| cone.dist_boundary(q) < 1e-9 * r.max(1e-300);
    let mut r0 = f64::INFINITY;
    let mut sites = 0;
    for i in 0..n {
        let p = cone.directions()[i];
        let r = largest_radius(
            &p,
            1.0,
            ball,
            |q| cone.contains(q),
            |q| in_edge_wedge(cone, i, q),
            |q| tie(q, (q - p).norm()),
        )
        .map_err(|pt| violated(pt, &format!("cone near edge {i} is not a wedge")))?;
        r0 = r0.min(r);
        sites += 1;
    }
    let mut r1 = f64::INFINITY;
    for i in 0..n {
        let a = cone.directions()[i];
        let b = cone.directions()[(i + 1) % n];
        let normal = *cone.face_normal(i);
        for k in 1..10 {
            let p = slerp(&a, &b, k as f64 / 10.0);
            let dp = cone.dist_edge_set(&p);
            let r = largest_radius(
                &p,
                dp,
                ball,
                |q| cone.contains(q),
                |q| normal.dot(&(q - p)) > 0.0,
                |q| tie(q, dp) || normal.dot(&(q - p)).abs() < 1e-9 * dp,
            )
            .map_err(|pt| violated(pt, &format!("cone near face {i} is not a half-ball")))?;
            r1 = r1.min(r);
            sites += 1;
        }
    }
    Ok(AssumptionReport {
        r0: Some(r0),
        r1: Some(r1),
        r2: None,
        sites,
        samples_per_site: ball.len(),
    })
}

fn validate_polyhedron(poly: &Polyhedron, ball: &[Vec3]) -> Result<AssumptionReport, GeometryError> {
    let verts = poly.vertices();
    let tie = |q: &Vec3, r: f64| poly.dist_boundary(q) < 1e-9 * r;
    let mut sites = 0;

    let mut r0 = f64::INFINITY;
    for (i, v) in verts.iter().enumerate() {
        let cone = &poly.vertex_cones()[i];
        let r = largest_radius(
            v,
            1.0,
            ball,
            |q| poly.contains(q),
            |q| cone.contains(&(q - v)),
            |q| tie(q, (q - v).norm()) || cone.dist_boundary(&(q - v)) < 1e-9 * (q - v).norm(),
        )
        .map_err(|pt| violated(pt, &format!("polyhedron near vertex {i} is not its tangent cone")))?;
        r0 = r0.min(r);
        sites += 1;
    }

    let mut r1 = f64::INFINITY;
    for (j, e) in poly.edges().iter().enumerate() {
        let (va, vb) = (verts[e.a], verts[e.b]);
        let cone = &poly.vertex_cones()[e.a];
        let idx = poly
            .vertex_edges(e.a)
            .iter()
            .find(|(edge, _)| *edge == j)
            .map(|(_, d)| *d)
            .expect("edge registered at its endpoint");
        for k in 1..8 {
            let p = va + (k as f64 / 8.0) * (vb - va);
            let dp = poly.dist_vertex_set(&p);
            let r = largest_radius(
                &p,
                dp,
                ball,
                |q| poly.contains(q),
                |q| in_edge_wedge(cone, idx, &(q - va)),
                |q| tie(q, dp) || cone.dist_boundary(&(q - va)) < 1e-9 * dp,
            )
            .map_err(|pt| violated(pt, &format!("polyhedron near edge {j} is not a wedge")))?;
            r1 = r1.min(r);
            sites += 1;
        }
    }

    let mut r2 = f64::INFINITY;
    for (k, f) in poly.faces().iter().enumerate() {
        let a = verts[f.vertices[0]];
        for t in 1..f.vertices.len() - 1 {
            let b = verts[f.vertices[t]];
            let c = verts[f.vertices[t + 1]];
            for (s1, s2) in [(1.0 / 3.0, 1.0 / 3.0), (0.2, 0.6), (0.6, 0.2)] {
                let xi = a + s1 * (b - a) + s2 * (c - a);
                let d = poly.dist_edge_set(&xi);
                let inward = -f.normal;
                let r = largest_radius(
                    &xi,
                    d,
                    ball,
                    |q| poly.contains(q),
                    |q| inward.dot(&(q - xi)) > 0.0,
                    |q| tie(q, d) || inward.dot(&(q - xi)).abs() < 1e-9 * d,
                )
                .map_err(|pt| violated(pt, &format!("polyhedron near face {k} is not a half-ball")))?;
                r2 = r2.min(r);
                sites += 1;
            }
        }
    }

    Ok(AssumptionReport {
        r0: Some(r0),
        r1: Some(r1),
        r2: Some(r2),
        sites,
        samples_per_site: ball.len(),
    })
}

/// Checks the local structure assumptions on deterministic samples.
pub fn validate_assumptions(domain: &Domain) -> Result<AssumptionReport, GeometryError> {
    let ball = halton_ball(SAMPLES);
    match domain {
        Domain::Cone(c) => validate_cone(c, &ball),
        Domain::Polyhedron(p) => validate_polyhedron(p, &ball),
        Domain::Free | Domain::HalfSpace(_) | Domain::Wedge(_) => Ok(AssumptionReport {
            r0: None,
            r1: None,
            r2: None,
            sites: 0,
            samples_per_site: 0,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, platonic_solid, PlatonicSolid};

    #[test]
    fn octant_passes() {
        let rep = validate_assumptions(&builtin_domain("octant").unwrap()).unwrap();
        // Edges of the octant are at angular distance pi/2: the wedge model holds
        // in balls of radius up to 1 around p_i, so the first candidate passes.
        assert_eq!(rep.r0, Some(0.5));
        assert!(rep.r1.unwrap() >= 0.25);
    }

    #[test]
    fn cube_and_reflex_cone_pass() {
        let rep = validate_assumptions(&Domain::Polyhedron(platonic_solid(PlatonicSolid::Cube))).unwrap();
        assert!(rep.r0.unwrap() > 0.0 && rep.r1.unwrap() > 0.0 && rep.r2.unwrap() > 0.0);
        let rep = validate_assumptions(&builtin_domain("octant_complement").unwrap()).unwrap();
        assert!(rep.r0.unwrap() > 0.0);
    }

    #[test]
    fn wedge_test_matches_cone_near_edge() {
        let c = match builtin_domain("octant").unwrap() {
            Domain::Cone(c) => c,
            _ => unreachable!(),
        };
        assert!(in_edge_wedge(&c, 0, &Vec3::new(1.0, 0.1, 0.1)));
        assert!(!in_edge_wedge(&c, 0, &Vec3::new(1.0, -0.1, 0.1)));
    }
}

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::SpectralError;
use crate::geometry::{PolyhedralCone, Vec3};

/// Default cap on mesh nodes.
pub const NODE_CAP: usize = 400_000;

/// Triangulation of the spherical polygon `M` with nodes on the unit sphere.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalMesh {
    pub nodes: Vec<[f64; 3]>,
    /// Counter-clockwise seen from outside the sphere.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub level: usize,
    #[serde(skip)]
    boundary_edges: HashSet<(usize, usize)>,
    /// Endpoints of the edge each node was created from (empty for level 0 nodes).
    #[serde(skip)]
    parents: Vec<Option<(usize, usize)>>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn det(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    a.dot(&b.cross(c))
}

impl SphericalMesh {
    pub fn node(&self, i: usize) -> Vec3 {
        Vec3::from(self.nodes[i])
    }

    pub fn num_interior(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.boundary[i]).collect()
    }

    /// Linear interpolation of nodal values from the parent mesh.
    pub fn prolongate(&self, coarse: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for i in 0..self.nodes.len() {
            let v = match self.parents.get(i).copied().flatten() {
                Some((a, b)) => 0.5 * (out[a] + out[b]),
                None => coarse.get(i).copied().unwrap_or(0.0),
            };
            out.push(v);
        }
        out
    }

    /// One round of midpoint subdivision, midpoints projected to the sphere.
    pub fn refine(&self, node_cap: usize) -> Result<SphericalMesh, SpectralError> {
        let mut nodes = self.nodes.clone();
        let mut boundary = self.boundary.clone();
        let mut parents = vec![None; self.nodes.len()];
        let mut boundary_edges = HashSet::new();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<[f64; 3]>, boundary: &mut Vec<bool>| -> usize {
            *mid.entry(key(a, b)).or_insert_with(|| {
                let m = (Vec3::from(nodes[a]) + Vec3::from(nodes[b])).normalize();
                nodes.push([m.x, m.y, m.z]);
                parents.push(Some((a, b)));
                let on_boundary = self.boundary_edges.contains(&key(a, b));
                boundary.push(on_boundary);
                if on_boundary {
                    let idx = nodes.len() - 1;
                    boundary_edges.insert(key(a, idx));
                    boundary_edges.insert(key(idx, b));
                }
                nodes.len() - 1
            })
        };
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut nodes, &mut boundary);
            let bc = midpoint(b, c, &mut nodes, &mut boundary);
            let ca = midpoint(c, a, &mut nodes, &mut boundary);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
            if nodes.len() > node_cap {
                return Err(SpectralError::MeshTooLarge { nodes: nodes.len(), cap: node_cap });
            }
        }
        Ok(SphericalMesh {
            nodes,
            triangles,
            boundary,
            level: self.level + 1,
            boundary_edges,
            parents,
        })
    }
}

/// Initial triangulation: the polygon itself for a triangle, a fan from the
/// normalized vertex mean when that point sees every boundary arc, spherical
/// ear clipping otherwise.
fn initial_triangles(cone: &PolyhedralCone) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), SpectralError> {
    let dirs = cone.directions().to_vec();
    let n = dirs.len();
    if n == 3 {
        return Ok((dirs, vec![[0, 1, 2]]));
    }
    let mean = dirs.iter().sum::<Vec3>();
    if mean.norm() > 1e-9 {
        let c = mean.normalize();
        let sees_all = (0..n).all(|i| det(&c, &dirs[i], &dirs[(i + 1) % n]) > 1e-12) && cone.contains(&c);
        if sees_all {
            let mut nodes = dirs;
            nodes.push(c);
            let tris = (0..n).map(|i| [n, i, (i + 1) % n]).collect();
            return Ok((nodes, tris));
        }
    }
    Ok((dirs.clone(), ear_clip(&dirs)?))
}

/// Ear clipping of a counter-clockwise (interior on the left) spherical polygon.
fn ear_clip(dirs: &[Vec3]) -> Result<Vec<[usize; 3]>, SpectralError> {
    let mut poly: Vec<usize> = (0..dirs.len()).collect();
    let mut tris = Vec::new();
    while poly.len() > 3 {
        let m = poly.len();
        let mut clipped = false;
        for k in 0..m {
            let (ip, ic, inx) = (poly[(k + m - 1) % m], poly[k], poly[(k + 1) % m]);
            let (a, b, c) = (&dirs[ip], &dirs[ic], &dirs[inx]);
            if det(a, b, c) <= 1e-12 {
                continue;
            }
            let blocked = poly.iter().any(|&j| {
                if j == ip || j == ic || j == inx {
                    return false;
                }
                let q = &dirs[j];
                det(a, b, q) >= 0.0 && det(b, c, q) >= 0.0 && det(c, a, q) >= 0.0
            });
            if blocked {
                continue;
            }
            tris.push([ip, ic, inx]);
            poly.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            return Err(SpectralError::CentroidOutside);
        }
    }
    tris.push([poly[0], poly[1], poly[2]]);
    Ok(tris)
}

/// Triangulates `M` and applies `level` rounds of midpoint subdivision.
pub fn mesh_spherical_polygon(cone: &PolyhedralCone, level: usize) -> Result<SphericalMesh, SpectralError> {
    mesh_with_cap(cone, level, NODE_CAP)
}

pub fn mesh_with_cap(cone: &PolyhedralCone, level: usize, node_cap: usize) -> Result<SphericalMesh, SpectralError> {
    let (nodes, triangles) = initial_triangles(cone)?;
    let n = cone.num_edges();
    let n_nodes = nodes.len();
    let boundary: Vec<bool> = (0..nodes.len()).map(|i| i < n).collect();
    let boundary_edges = (0..n).map(|i| key(i, (i + 1) % n)).collect();
    let mut mesh = SphericalMesh {
        nodes: nodes.iter().map(|v| [v.x, v.y, v.z]).collect(),
        triangles,
        boundary,
        level: 0,
        boundary_edges,
        parents: vec![None; n_nodes],
    };
    for _ in 0..level {
        mesh = mesh.refine(node_cap)?;
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, Domain};

    fn octant() -> PolyhedralCone {
        match builtin_domain("octant").unwrap() {
            Domain::Cone(c) => c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn triangle_counts() {
        let m = mesh_spherical_polygon(&octant(), 0).unwrap();
        assert_eq!(m.triangles.len(), 1);
        assert_eq!(m.boundary_nodes().len(), 3);
        let m = mesh_spherical_polygon(&octant(), 3).unwrap();
        assert_eq!(m.triangles.len(), 64);
        let c = PolyhedralCone::regular(16, 1.5).unwrap();
        assert_eq!(mesh_spherical_polygon(&c, 2).unwrap().triangles.len(), 16 * 16);
    }

    #[test]
    fn boundary_nodes_lie_on_arcs_and_orientation_is_positive() {
        let c = octant();
        let m = mesh_spherical_polygon(&c, 4).unwrap();
        for (i, &b) in m.boundary.iter().enumerate() {
            let p = m.node(i);
            assert!((p.norm() - 1.0).abs() < 1e-12);
            let d = c.dist_boundary(&p);
            if b {
                assert!(d < 1e-9);
            } else {
                assert!(d > 1e-9);
            }
        }
        for t in &m.triangles {
            assert!(det(&m.node(t[0]), &m.node(t[1]), &m.node(t[2])) > 0.0);
        }
    }

    #[test]
    fn nonconvex_polygon_uses_ear_clipping() {
        // L-shaped region around the north pole.
        let pts = [(0.0, 0.0), (0.4, 0.0), (0.4, 0.2), (0.2, 0.2), (0.2, 0.4), (0.0, 0.4)];
        let dirs: Vec<Vec3> = pts.iter().map(|&(x, y)| Vec3::new(x - 0.2, y - 0.2, 1.0).normalize()).collect();
        let c = PolyhedralCone::new(dirs).unwrap();
        assert!(!c.is_convex());
        let m = mesh_spherical_polygon(&c, 2).unwrap();
        let area: f64 = m
            .triangles
            .iter()
            .map(|t| super::super::fem::spherical_triangle_area(&m.node(t[0]), &m.node(t[1]), &m.node(t[2])))
            .sum();
        assert!((area - c.polygon_area()).abs() < 1e-12);
    }
}

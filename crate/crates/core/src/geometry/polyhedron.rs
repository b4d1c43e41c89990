use std::collections::HashMap;
use std::f64::consts::PI;

use super::{dist_to_segment, orthogonal_unit, GeometryError, PolyhedralCone, Vec3};

/// Planar polygonal face, vertices counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub vertices: Vec<usize>,
    /// Outward unit normal.
    pub normal: Vec3,
    /// Plane offset: `normal · x = offset` on the face.
    pub offset: f64,
    basis: (Vec3, Vec3),
    outline: Vec<(f64, f64)>,
}

impl Face {
    fn plane_coords(&self, x: &Vec3) -> (f64, f64) {
        (x.dot(&self.basis.0), x.dot(&self.basis.1))
    }

    /// Whether a point of the face plane lies in the closed polygon.
    pub(crate) fn contains_projection(&self, x: &Vec3) -> bool {
        let (px, py) = self.plane_coords(x);
        let n = self.outline.len();
        let mut winding = 0i32;
        for k in 0..n {
            let (ax, ay) = self.outline[k];
            let (bx, by) = self.outline[(k + 1) % n];
            let cross = (bx - ax) * (py - ay) - (px - ax) * (by - ay);
            let scale = ((bx - ax).abs() + (by - ay).abs()) * 1e-13;
            let on_segment = cross.abs() <= scale
                && px >= ax.min(bx) - 1e-13
                && px <= ax.max(bx) + 1e-13
                && py >= ay.min(by) - 1e-13
                && py <= ay.max(by) + 1e-13;
            if on_segment {
                return true;
            }
            if ay <= py {
                if by > py && cross > 0.0 {
                    winding += 1;
                }
            } else if by <= py && cross < 0.0 {
                winding -= 1;
            }
        }
        winding != 0
    }
}

/// Straight edge joining two vertices, shared by exactly two faces.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub faces: [usize; 2],
    /// Interior dihedral angle.
    pub kappa: f64,
}

/// Bounded polyhedron with planar polygonal faces.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    vertices: Vec<Vec3>,
    faces: Vec<Face>,
    edges: Vec<Edge>,
    vertex_cones: Vec<PolyhedralCone>,
    /// For each vertex, the direction index in its cone of each incident edge.
    vertex_edges: Vec<Vec<(usize, usize)>>,
    convex: bool,
    diameter: f64,
}

impl Polyhedron {
    /// Builds a polyhedron from vertices and face index lists.
    ///
    /// Faces must be consistently oriented; if the orientation is inward the
    /// whole surface is flipped. Edges are derived from the faces.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Result<Self, GeometryError> {
        let invalid = |msg: String| GeometryError::InvalidPolyhedron(msg);
        if vertices.len() < 4 {
            return Err(invalid(format!("{} vertices, need at least 4", vertices.len())));
        }
        let scale = bounding_scale(&vertices);
        for (i, a) in vertices.iter().enumerate() {
            for (j, b) in vertices.iter().enumerate().skip(i + 1) {
                if (a - b).norm() <= 1e-12 * scale {
                    return Err(invalid(format!("vertices {i} and {j} coincide")));
                }
            }
        }
        for (k, f) in faces.iter().enumerate() {
            if f.len() < 3 {
                return Err(invalid(format!("face {k} has fewer than 3 vertices")));
            }
            for (pos, &v) in f.iter().enumerate() {
                if v >= vertices.len() {
                    return Err(invalid(format!("face {k} references vertex {v}")));
                }
                if f[pos + 1..].contains(&v) {
                    return Err(invalid(format!("face {k} repeats vertex {v}")));
                }
            }
        }

        // Edge incidence and orientation consistency.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, f) in faces.iter().enumerate() {
            for pos in 0..f.len() {
                let key = (f[pos], f[(pos + 1) % f.len()]);
                if directed.insert(key, k).is_some() {
                    return Err(invalid(format!(
                        "edge {:?} traversed twice in the same direction (inconsistent orientation or non-manifold)",
                        key
                    )));
                }
            }
        }
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                return Err(invalid(format!("edge ({a}, {b}) belongs to only one face")));
            }
        }

        let mut faces = faces;
        let volume = signed_volume(&vertices, &faces);
        if volume.abs() <= 1e-12 * scale.powi(3) {
            return Err(invalid("zero enclosed volume".into()));
        }
        if volume < 0.0 {
            for f in faces.iter_mut() {
                f.reverse();
            }
        }

        let mut built_faces = Vec::with_capacity(faces.len());
        for (k, f) in faces.iter().enumerate() {
            built_faces.push(make_face(&vertices, f.clone(), scale).map_err(|m| invalid(format!("face {k}: {m}")))?);
        }

        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, f) in built_faces.iter().enumerate() {
            let n = f.vertices.len();
            for pos in 0..n {
                directed.insert((f.vertices[pos], f.vertices[(pos + 1) % n]), k);
            }
        }

        // Tangent cone at each vertex: the arc dir(prev) -> dir(next) of every
        // incident face, chained into a cycle.
        let mut vertex_cones = Vec::with_capacity(vertices.len());
        let mut vertex_dirs_idx: Vec<Vec<usize>> = Vec::with_capacity(vertices.len());
        for (v, pos_v) in vertices.iter().enumerate() {
            let mut arcs: HashMap<usize, usize> = HashMap::new();
            for f in &built_faces {
                let n = f.vertices.len();
                if let Some(p) = f.vertices.iter().position(|&w| w == v) {
                    let prev = f.vertices[(p + n - 1) % n];
                    let next = f.vertices[(p + 1) % n];
                    arcs.insert(prev, next);
                }
            }
            if arcs.len() < 3 {
                return Err(invalid(format!("vertex {v} has fewer than 3 incident faces")));
            }
            let start = *arcs.keys().min().unwrap();
            let mut order = vec![start];
            let mut cur = start;
            loop {
                let nxt = *arcs
                    .get(&cur)
                    .ok_or_else(|| invalid(format!("vertex {v} is not manifold")))?;
                if nxt == start {
                    break;
                }
                if order.len() > arcs.len() {
                    return Err(invalid(format!("vertex {v} is not manifold")));
                }
                order.push(nxt);
                cur = nxt;
            }
            if order.len() != arcs.len() {
                return Err(invalid(format!("vertex {v} has more than one cycle of faces")));
            }
            let dirs: Vec<Vec3> = order.iter().map(|&w| (vertices[w] - pos_v).normalize()).collect();
            let cone = PolyhedralCone::new(dirs).map_err(|e| invalid(format!("tangent cone at vertex {v}: {e}")))?;
            vertex_cones.push(cone);
            vertex_dirs_idx.push(order);
        }

        let mut edges = Vec::new();
        let mut keys: Vec<(usize, usize)> = directed.keys().copied().filter(|(a, b)| a < b).collect();
        keys.sort_unstable();
        let mut vertex_edges = vec![Vec::new(); vertices.len()];
        for (a, b) in keys {
            let fa = directed[&(a, b)];
            let fb = directed[&(b, a)];
            let idx = vertex_dirs_idx[a].iter().position(|&w| w == b).unwrap();
            let kappa = vertex_cones[a].inner_angles()[idx];
            let e = edges.len();
            vertex_edges[a].push((e, idx));
            let idx_b = vertex_dirs_idx[b].iter().position(|&w| w == a).unwrap();
            vertex_edges[b].push((e, idx_b));
            edges.push(Edge { a, b, faces: [fa, fb], kappa });
        }

        // Each edge's interior must not contain another vertex.
        for (j, e) in edges.iter().enumerate() {
            for (i, v) in vertices.iter().enumerate() {
                if i != e.a && i != e.b && dist_to_segment(v, &vertices[e.a], &vertices[e.b]) <= 1e-12 * scale {
                    return Err(invalid(format!("edge {j} contains vertex {i}")));
                }
            }
        }

        let convex = edges.iter().all(|e| e.kappa < PI);
        let mut diameter: f64 = 0.0;
        for a in &vertices {
            for b in &vertices {
                diameter = diameter.max((a - b).norm());
            }
        }

        Ok(Polyhedron {
            vertices,
            faces: built_faces,
            edges,
            vertex_cones,
            vertex_edges,
            convex,
            diameter,
        })
    }

    /// Convex hull of a point set whose hull faces are genuine polygons.
    ///
    /// Coplanar hull facets are merged, so a cube has six square faces.
    pub fn convex_hull(points: Vec<Vec3>) -> Result<Self, GeometryError> {
        let n = points.len();
        let scale = bounding_scale(&points);
        let tol = 1e-9 * scale;
        let mut planes: Vec<(Vec3, f64)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let nrm = (points[j] - points[i]).cross(&(points[k] - points[i]));
                    if nrm.norm() <= tol * scale {
                        continue;
                    }
                    let mut nrm = nrm.normalize();
                    let mut off = nrm.dot(&points[i]);
                    let above = points.iter().filter(|p| nrm.dot(p) - off > tol).count();
                    let below = points.iter().filter(|p| nrm.dot(p) - off < -tol).count();
                    if above > 0 && below > 0 {
                        continue;
                    }
                    if above > 0 {
                        nrm = -nrm;
                        off = -off;
                    }
                    if !planes.iter().any(|(m, o)| (m - nrm).norm() < 1e-9 && (o - off).abs() < tol) {
                        planes.push((nrm, off));
                    }
                }
            }
        }
        let mut faces = Vec::with_capacity(planes.len());
        for (nrm, off) in &planes {
            let on: Vec<usize> = (0..n).filter(|&i| (nrm.dot(&points[i]) - off).abs() <= tol).collect();
            let centroid: Vec3 = on.iter().map(|&i| points[i]).sum::<Vec3>() / on.len() as f64;
            let u = orthogonal_unit(nrm);
            let v = nrm.cross(&u);
            let mut ordered = on.clone();
            ordered.sort_by(|&a, &b| {
                let da = points[a] - centroid;
                let db = points[b] - centroid;
                let ta = da.dot(&v).atan2(da.dot(&u));
                let tb = db.dot(&v).atan2(db.dot(&u));
                ta.total_cmp(&tb)
            });
            faces.push(ordered);
        }
        Self::new(points, faces)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_cones(&self) -> &[PolyhedralCone] {
        &self.vertex_cones
    }

    /// Incident edges of vertex `v` as `(edge index, direction index in its cone)`.
    pub fn vertex_edges(&self, v: usize) -> &[(usize, usize)] {
        &self.vertex_edges[v]
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Solid angle at vertex `v`: area of its tangent cone's spherical polygon.
    pub fn solid_angle(&self, v: usize) -> Result<f64, GeometryError> {
        self.vertex_cones
            .get(v)
            .map(|c| c.polygon_area())
            .ok_or(GeometryError::IndexOutOfRange {
                index: v,
                len: self.vertices.len(),
            })
    }

    pub fn inner_angle(&self, e: usize) -> Result<f64, GeometryError> {
        self.edges.get(e).map(|e| e.kappa).ok_or(GeometryError::IndexOutOfRange {
            index: e,
            len: self.edges.len(),
        })
    }

    /// Open-interior membership.
    pub fn contains(&self, x: &Vec3) -> bool {
        if self.convex {
            self.faces.iter().all(|f| f.normal.dot(x) < f.offset)
        } else {
            self.winding_number(x) > 0.5
        }
    }

    /// Generalized winding number from the signed solid angles of the faces.
    pub fn winding_number(&self, x: &Vec3) -> f64 {
        let mut total = 0.0;
        for f in &self.faces {
            let a = self.vertices[f.vertices[0]] - x;
            for k in 1..f.vertices.len() - 1 {
                let b = self.vertices[f.vertices[k]] - x;
                let c = self.vertices[f.vertices[k + 1]] - x;
                let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
                let num = a.dot(&b.cross(&c));
                let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
                total += 2.0 * num.atan2(den);
            }
        }
        total / (4.0 * PI)
    }

    pub fn dist_face(&self, k: usize, x: &Vec3) -> f64 {
        let f = &self.faces[k];
        let h = f.normal.dot(x) - f.offset;
        let proj = x - h * f.normal;
        if f.contains_projection(&proj) {
            h.abs()
        } else {
            let n = f.vertices.len();
            (0..n)
                .map(|i| {
                    dist_to_segment(x, &self.vertices[f.vertices[i]], &self.vertices[f.vertices[(i + 1) % n]])
                })
                .fold(f64::INFINITY, f64::min)
        }
    }

    pub fn dist_boundary(&self, x: &Vec3) -> f64 {
        (0..self.faces.len())
            .map(|k| self.dist_face(k, x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn dist_edge(&self, j: usize, x: &Vec3) -> Result<f64, GeometryError> {
        let e = self.edges.get(j).ok_or(GeometryError::IndexOutOfRange {
            index: j,
            len: self.edges.len(),
        })?;
        Ok(dist_to_segment(x, &self.vertices[e.a], &self.vertices[e.b]))
    }

    pub fn dist_edge_set(&self, x: &Vec3) -> f64 {
        self.edges
            .iter()
            .map(|e| dist_to_segment(x, &self.vertices[e.a], &self.vertices[e.b]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn dist_vertex(&self, i: usize, x: &Vec3) -> f64 {
        (x - self.vertices[i]).norm()
    }

    pub fn dist_vertex_set(&self, x: &Vec3) -> f64 {
        self.vertices
            .iter()
            .map(|v| (x - v).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `d(x, V̂ ∩ E_j)`: distance to the nearer endpoint of edge `j`.
    pub fn dist_edge_endpoints(&self, j: usize, x: &Vec3) -> f64 {
        let e = &self.edges[j];
        (x - self.vertices[e.a]).norm().min((x - self.vertices[e.b]).norm())
    }

    pub fn nearest_vertex(&self, x: &Vec3) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, v) in self.vertices.iter().enumerate() {
            let d = (x - v).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    pub fn nearest_edge(&self, x: &Vec3) -> usize {
        let mut best = (0, f64::INFINITY);
        for (j, e) in self.edges.iter().enumerate() {
            let d = dist_to_segment(x, &self.vertices[e.a], &self.vertices[e.b]);
            if d < best.1 {
                best = (j, d);
            }
        }
        best.0
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }
}

fn bounding_scale(points: &[Vec3]) -> f64 {
    let mut s: f64 = 0.0;
    for p in points {
        s = s.max(p.amax());
    }
    s.max(1.0)
}

fn signed_volume(vertices: &[Vec3], faces: &[Vec<usize>]) -> f64 {
    let mut vol = 0.0;
    for f in faces {
        let a = vertices[f[0]];
        for k in 1..f.len() - 1 {
            vol += a.dot(&vertices[f[k]].cross(&vertices[f[k + 1]]));
        }
    }
    vol / 6.0
}

fn make_face(vertices: &[Vec3], idx: Vec<usize>, scale: f64) -> Result<Face, String> {
    // Newell normal.
    let n = idx.len();
    let mut normal = Vec3::zeros();
    for k in 0..n {
        let a = vertices[idx[k]];
        let b = vertices[idx[(k + 1) % n]];
        normal.x += (a.y - b.y) * (a.z + b.z);
        normal.y += (a.z - b.z) * (a.x + b.x);
        normal.z += (a.x - b.x) * (a.y + b.y);
    }
    if normal.norm() <= 1e-14 * scale * scale {
        return Err("zero area".into());
    }
    let normal = normal.normalize();
    let centroid: Vec3 = idx.iter().map(|&i| vertices[i]).sum::<Vec3>() / n as f64;
    let offset = normal.dot(&centroid);
    for &i in &idx {
        if (normal.dot(&vertices[i]) - offset).abs() > 1e-9 * scale {
            return Err("not planar".into());
        }
    }
    for k in 0..n {
        let prev = vertices[idx[(k + n - 1) % n]];
        let cur = vertices[idx[k]];
        let next = vertices[idx[(k + 1) % n]];
        if (cur - prev).cross(&(next - cur)).dot(&normal) <= 0.0 {
            return Err(format!(
                "reflex or straight corner at vertex {}; tangent cones need convex face corners",
                idx[k]
            ));
        }
    }
    let u = orthogonal_unit(&normal);
    let v = normal.cross(&u);
    let outline = idx.iter().map(|&i| (vertices[i].dot(&u), vertices[i].dot(&v))).collect();
    Ok(Face {
        vertices: idx,
        normal,
        offset,
        basis: (u, v),
        outline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::unit_box;
    use approx::assert_relative_eq;

    #[test]
    fn cube_structure() {
        let c = unit_box(1.0, 1.0, 1.0);
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.faces().len(), 6);
        assert_eq!(c.edges().len(), 12);
        for e in c.edges() {
            assert_relative_eq!(e.kappa, PI / 2.0, epsilon = 1e-12);
        }
        for v in 0..8 {
            assert_relative_eq!(c.solid_angle(v).unwrap(), PI / 2.0, epsilon = 1e-12);
        }
        assert_relative_eq!(c.diameter(), 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn cube_distances() {
        let c = unit_box(1.0, 1.0, 1.0);
        let center = Vec3::new(0.5, 0.5, 0.5);
        assert!(c.contains(&center));
        assert_relative_eq!(c.dist_boundary(&center), 0.5, epsilon = 1e-14);
        let x = Vec3::new(0.5, 0.1, 0.1);
        assert_relative_eq!(c.dist_edge_set(&x), 0.02f64.sqrt(), epsilon = 1e-14);
        assert_eq!(c.dist_edge_set(&Vec3::zeros()), 0.0);
        assert_eq!(c.dist_vertex_set(&Vec3::zeros()), 0.0);
        assert_eq!(c.dist_boundary(&Vec3::new(0.3, 0.0, 0.4)), 0.0);
        assert_relative_eq!(c.winding_number(&center), 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.winding_number(&Vec3::new(2.0, 0.5, 0.5)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn inverted_orientation_is_fixed() {
        let c = unit_box(1.0, 1.0, 1.0);
        let faces: Vec<Vec<usize>> = c
            .faces()
            .iter()
            .map(|f| f.vertices.iter().rev().copied().collect())
            .collect();
        let flipped = Polyhedron::new(c.vertices().to_vec(), faces).unwrap();
        assert!(flipped.contains(&Vec3::new(0.5, 0.5, 0.5)));
        for v in 0..8 {
            assert_relative_eq!(flipped.solid_angle(v).unwrap(), PI / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn open_surface_rejected() {
        let c = unit_box(1.0, 1.0, 1.0);
        let faces: Vec<Vec<usize>> = c.faces().iter().skip(1).map(|f| f.vertices.clone()).collect();
        assert!(matches!(
            Polyhedron::new(c.vertices().to_vec(), faces),
            Err(GeometryError::InvalidPolyhedron(_))
        ));
    }

    fn twisted_prism(schonhardt: bool) -> Result<Polyhedron, GeometryError> {
        let mut vertices = Vec::new();
        for (z, shift) in [(0.0, 0.0), (1.0, PI / 6.0)] {
            for i in 0..3 {
                let t = 2.0 * PI * i as f64 / 3.0 + shift;
                vertices.push(Vec3::new(t.cos(), t.sin(), z));
            }
        }
        let mut faces = vec![vec![0, 2, 1], vec![3, 4, 5]];
        for i in 0..3 {
            let j = (i + 1) % 3;
            if !schonhardt {
                faces.push(vec![i, j, i + 3]);
                faces.push(vec![j, j + 3, i + 3]);
            } else {
                faces.push(vec![i, j, j + 3]);
                faces.push(vec![i, j + 3, i + 3]);
            }
        }
        Polyhedron::new(vertices, faces)
    }

    #[test]
    fn schonhardt_polyhedron_is_nonconvex() {
        let hull = twisted_prism(false).unwrap();
        let twisted = twisted_prism(true).unwrap();
        let reflex = |p: &Polyhedron| p.edges().iter().filter(|e| e.kappa > PI).count();
        assert!(hull.is_convex());
        assert_eq!(reflex(&hull), 0);
        assert!(!twisted.is_convex());
        assert_eq!(reflex(&twisted), 3);
        let axis = Vec3::new(0.0, 0.0, 0.5);
        assert!(twisted.contains(&axis));
        assert_relative_eq!(twisted.winding_number(&axis), 1.0, epsilon = 1e-12);
        // Just inside a side face of the hull, in the notch cut by the fold.
        let h = 0.5 * (twisted.vertices()[1] + twisted.vertices()[3]);
        let mid = Vec3::new(0.9 * h.x, 0.9 * h.y, h.z);
        assert!(hull.contains(&mid));
        assert!(!twisted.contains(&mid));
    }

    #[test]
    fn reflex_face_corner_rejected() {
        let base = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
        let mut vertices = Vec::new();
        for z in [0.0, 1.0] {
            for &(x, y) in &base {
                vertices.push(Vec3::new(x, y, z));
            }
        }
        let mut faces = vec![(0..6).rev().collect::<Vec<_>>(), (6..12).collect::<Vec<_>>()];
        for k in 0..6 {
            let k1 = (k + 1) % 6;
            faces.push(vec![k, k1, k1 + 6, k + 6]);
        }
        let err = Polyhedron::new(vertices, faces).unwrap_err();
        assert!(err.to_string().contains("reflex"), "{err}");
    }
}

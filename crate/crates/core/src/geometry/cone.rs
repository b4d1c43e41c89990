use std::f64::consts::PI;

use super::{dist_to_ray, GeometryError, Vec3, ANGLE_TOL, UNIT_TOL};

/// Infinite polyhedral cone with vertex at the origin.
///
/// The cone is stored through the ordered vertex directions `p_i` of its
/// spherical polygon `M`. The boundary of `M` is traversed with the interior
/// on the left when looking at the sphere from outside, so `{e1, e2, e3}` is
/// the positive octant and `{e1, e3, e2}` its complement. Face `i` is the
/// planar sector spanned by `p_i` and `p_{i+1}`; edge `i` is the half-line
/// through `p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCone {
    dirs: Vec<Vec3>,
    normals: Vec<Vec3>,
    inner_angles: Vec<f64>,
    convex: bool,
}

impl PolyhedralCone {
    /// Builds a cone from ordered unit directions.
    pub fn new(dirs: Vec<Vec3>) -> Result<Self, GeometryError> {
        let n = dirs.len();
        if n < 3 {
            return Err(GeometryError::TooFewDirections(n));
        }
        for (index, p) in dirs.iter().enumerate() {
            let norm = p.norm();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(GeometryError::NonUnitDirection { index, norm });
            }
        }
        let mut normals = Vec::with_capacity(n);
        for i in 0..n {
            let c = dirs[i].cross(&dirs[(i + 1) % n]);
            if c.norm() < ANGLE_TOL {
                return Err(GeometryError::DegenerateFace { index: i });
            }
            normals.push(c.normalize());
        }
        check_simple(&dirs, &normals)?;

        let mut cone = PolyhedralCone {
            dirs,
            normals,
            inner_angles: vec![0.0; n],
            convex: false,
        };
        let mut angles = Vec::with_capacity(n);
        for i in 0..n {
            angles.push(cone.bisector_angle(i)?);
        }
        cone.convex = angles.iter().all(|&k| k < PI);
        cone.inner_angles = angles;
        Ok(cone)
    }

    /// Like [`PolyhedralCone::new`] but normalizes the inputs first.
    pub fn from_directions(dirs: &[Vec3]) -> Result<Self, GeometryError> {
        let mut unit = Vec::with_capacity(dirs.len());
        for (index, d) in dirs.iter().enumerate() {
            let norm = d.norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(GeometryError::NonUnitDirection { index, norm });
            }
            unit.push(d / norm);
        }
        Self::new(unit)
    }

    /// Regular `n`-gon cone around `+z` with vertex directions at the given
    /// colatitude (angle from `+z`).
    pub fn regular(n: usize, colatitude: f64) -> Result<Self, GeometryError> {
        let (s, c) = colatitude.sin_cos();
        let dirs = (0..n)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                Vec3::new(s * phi.cos(), s * phi.sin(), c)
            })
            .collect();
        Self::new(dirs)
    }

    pub fn num_edges(&self) -> usize {
        self.dirs.len()
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.dirs
    }

    pub fn direction(&self, i: usize) -> Result<&Vec3, GeometryError> {
        self.dirs.get(i).ok_or(GeometryError::IndexOutOfRange {
            index: i,
            len: self.dirs.len(),
        })
    }

    /// Inward unit normal of face `i` (the sector between `p_i` and `p_{i+1}`).
    pub fn face_normal(&self, i: usize) -> &Vec3 {
        &self.normals[i]
    }

    pub fn face_normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn inner_angles(&self) -> &[f64] {
        &self.inner_angles
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn inner_angle(&self, i: usize) -> Result<f64, GeometryError> {
        self.inner_angles
            .get(i)
            .copied()
            .ok_or(GeometryError::IndexOutOfRange {
                index: i,
                len: self.dirs.len(),
            })
    }

    /// Area of the spherical polygon `M` by spherical excess.
    pub fn polygon_area(&self) -> f64 {
        let n = self.dirs.len() as f64;
        self.inner_angles.iter().sum::<f64>() - (n - 2.0) * PI
    }

    /// Open-cone membership (boundary ties are not resolved here).
    pub fn contains(&self, x: &Vec3) -> bool {
        if self.convex {
            self.normals.iter().all(|n| n.dot(x) > 0.0)
        } else {
            let r = x.norm();
            r > 0.0 && self.polygon_contains(&(x / r))
        }
    }

    /// Side test against the nearest feature of `∂M` (arc interior or corner).
    ///
    /// A corner with a left turn is convex: `q` must be left of both arcs.
    /// At a reflex corner being left of either arc suffices.
    fn polygon_contains(&self, q: &Vec3) -> bool {
        let n = self.dirs.len();
        let mut best = f64::INFINITY;
        let mut inside = false;
        for i in 0..n {
            let (a, b, nrm) = (&self.dirs[i], &self.dirs[(i + 1) % n], &self.normals[i]);
            let h = nrm.dot(q);
            let foot = q - h * nrm;
            if foot.norm() > 0.0 && on_arc(&foot.normalize(), a, b, nrm) {
                let d = h.abs().min(1.0).asin();
                if d < best {
                    best = d;
                    inside = h > 0.0;
                }
            }
        }
        for i in 0..n {
            let d = q.dot(&self.dirs[i]).clamp(-1.0, 1.0).acos();
            if d < best {
                best = d;
                let prev = &self.normals[(i + n - 1) % n];
                let next = &self.normals[i];
                let (l, r) = (prev.dot(q) > 0.0, next.dot(q) > 0.0);
                inside = if self.left_turn(i) { l && r } else { l || r };
            }
        }
        inside
    }

    /// Whether the boundary turns left at `p_i`, i.e. the corner is convex.
    fn left_turn(&self, i: usize) -> bool {
        let n = self.dirs.len();
        self.normals[(i + n - 1) % n].dot(&self.dirs[(i + 1) % n]) > 0.0
    }

    /// `d(x, V) = |x|`.
    pub fn dist_vertex(&self, x: &Vec3) -> f64 {
        x.norm()
    }

    /// Distance to the closed half-line `E_i = {t p_i : t >= 0}`.
    pub fn dist_edge(&self, i: usize, x: &Vec3) -> Result<f64, GeometryError> {
        let p = self.direction(i)?;
        Ok(dist_to_ray(x, &Vec3::zeros(), p))
    }

    pub fn dist_edge_set(&self, x: &Vec3) -> f64 {
        self.dirs
            .iter()
            .map(|p| dist_to_ray(x, &Vec3::zeros(), p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of an edge realizing `d(x, Ê)`.
    pub fn nearest_edge(&self, x: &Vec3) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.dirs.iter().enumerate() {
            let d = dist_to_ray(x, &Vec3::zeros(), p);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    /// Distance from `x` to the closed planar sector of face `i`.
    pub fn dist_face(&self, i: usize, x: &Vec3) -> f64 {
        let n = self.dirs.len();
        let p = &self.dirs[i];
        let q = &self.dirs[(i + 1) % n];
        let normal = &self.normals[i];
        let h = normal.dot(x);
        let proj = x - h * normal;
        if self.sector_contains(i, &proj) {
            h.abs()
        } else {
            let o = Vec3::zeros();
            dist_to_ray(x, &o, p).min(dist_to_ray(x, &o, q))
        }
    }

    /// Whether a point of the plane of face `i` lies in the closed sector.
    pub(crate) fn sector_contains(&self, i: usize, proj: &Vec3) -> bool {
        let n = self.dirs.len();
        let p = &self.dirs[i];
        let q = &self.dirs[(i + 1) % n];
        let g = p.dot(q);
        let det = 1.0 - g * g;
        let xp = proj.dot(p);
        let xq = proj.dot(q);
        let a = (xp - g * xq) / det;
        let b = (xq - g * xp) / det;
        let tol = -1e-14 * proj.norm();
        a >= tol && b >= tol
    }

    pub fn dist_boundary(&self, x: &Vec3) -> f64 {
        (0..self.dirs.len())
            .map(|i| self.dist_face(i, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Unit tangent at `p_i` pointing along face `i` (toward `p_{i+1}`), and
    /// along face `i - 1` (toward `p_{i-1}`).
    pub(crate) fn edge_tangents(&self, i: usize) -> (Vec3, Vec3) {
        let n = self.dirs.len();
        let p = &self.dirs[i];
        let next = &self.dirs[(i + 1) % n];
        let prev = &self.dirs[(i + n - 1) % n];
        let u = (next - next.dot(p) * p).normalize();
        let w = (prev - prev.dot(p) * p).normalize();
        (u, w)
    }

    /// Inner angle at edge `i`: the unsigned angle between the two face
    /// tangents, flipped to its reflex value when the bisector leaves the cone.
    fn bisector_angle(&self, i: usize) -> Result<f64, GeometryError> {
        let (u, w) = self.edge_tangents(i);
        let alpha = u.dot(&w).clamp(-1.0, 1.0).acos();
        if (alpha - PI).abs() < ANGLE_TOL {
            return Err(GeometryError::StraightEdge { index: i });
        }
        if alpha < ANGLE_TOL {
            return Err(GeometryError::DegenerateFace { index: i });
        }
        let bisector = (u + w).normalize();
        let probe = self.dirs[i] + 1e-3 * bisector;
        let inside = self.polygon_contains(&probe.normalize());
        Ok(if inside { alpha } else { 2.0 * PI - alpha })
    }

    /// Direction inside `M` realizing (approximately) the largest angular
    /// distance to `∂M`, found on a Fibonacci sphere sample.
    pub fn interior_direction(&self) -> Vec3 {
        let count = 4000;
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut best: Option<(Vec3, f64)> = None;
        for k in 0..count {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            let q = Vec3::new(r * phi.cos(), r * phi.sin(), z);
            if !self.contains(&q) {
                continue;
            }
            let d = self.dist_boundary(&q);
            if best.as_ref().is_none_or(|(_, bd)| d > *bd) {
                best = Some((q, d));
            }
        }
        let (mut q, _) = best.unwrap_or((self.dirs.iter().sum::<Vec3>().normalize(), 0.0));
        // Refine by a few rounds of local search.
        let mut step = 0.05;
        for _ in 0..40 {
            let t1 = super::orthogonal_unit(&q);
            let t2 = q.cross(&t1);
            let mut improved = false;
            let base = self.dist_boundary(&q);
            for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                let cand = (q + step * (a * t1 + b * t2)).normalize();
                if self.contains(&cand) && self.dist_boundary(&cand) > base {
                    q = cand;
                    improved = true;
                    break;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        q
    }
}

/// Rejects spherical polygons whose non-adjacent boundary arcs meet.
fn check_simple(dirs: &[Vec3], normals: &[Vec3]) -> Result<(), GeometryError> {
    let n = dirs.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if (dirs[i] - dirs[j]).norm() < ANGLE_TOL {
                return Err(GeometryError::SelfIntersectingPolygon { first: i, second: j });
            }
        }
    }
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = (&dirs[i], &dirs[(i + 1) % n]);
            let (c, d) = (&dirs[j], &dirs[(j + 1) % n]);
            if arcs_intersect(a, b, &normals[i], c, d, &normals[j]) {
                return Err(GeometryError::SelfIntersectingPolygon { first: i, second: j });
            }
        }
    }
    Ok(())
}

fn on_arc(q: &Vec3, a: &Vec3, b: &Vec3, n: &Vec3) -> bool {
    let tol = -1e-12;
    a.cross(q).dot(n) >= tol && q.cross(b).dot(n) >= tol && q.dot(&(a + b)) > 0.0
}

/// Intersection test for the minor great-circle arcs `ab` and `cd`.
fn arcs_intersect(a: &Vec3, b: &Vec3, n1: &Vec3, c: &Vec3, d: &Vec3, n2: &Vec3) -> bool {
    let line = n1.cross(n2);
    if line.norm() < ANGLE_TOL {
        // Same great circle: overlap iff an endpoint lies on the other arc.
        return on_arc(c, a, b, n1) || on_arc(d, a, b, n1) || on_arc(a, c, d, n2) || on_arc(b, c, d, n2);
    }
    let q = line.normalize();
    [q, -q]
        .iter()
        .any(|q| on_arc(q, a, b, n1) && on_arc(q, c, d, n2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn octant() -> PolyhedralCone {
        PolyhedralCone::new(vec![Vec3::x(), Vec3::y(), Vec3::z()]).unwrap()
    }

    #[test]
    fn octant_angles_and_area() {
        let c = octant();
        for &k in c.inner_angles() {
            assert_relative_eq!(k, PI / 2.0, epsilon = 1e-12);
        }
        assert!(c.is_convex());
        assert_relative_eq!(c.polygon_area(), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn complement_of_octant_is_reflex() {
        let c = PolyhedralCone::new(vec![Vec3::x(), Vec3::z(), Vec3::y()]).unwrap();
        for &k in c.inner_angles() {
            assert_relative_eq!(k, 1.5 * PI, epsilon = 1e-12);
        }
        assert!(!c.is_convex());
        assert_relative_eq!(c.polygon_area() + octant().polygon_area(), 4.0 * PI, epsilon = 1e-12);
        assert!(c.contains(&Vec3::new(-1.0, 0.5, 0.5)));
        assert!(!c.contains(&Vec3::new(1.0, 0.5, 0.5)));
    }

    #[test]
    fn antipodal_pair_is_degenerate() {
        let err = PolyhedralCone::new(vec![Vec3::x(), Vec3::y(), -Vec3::x()]).unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateFace { .. }));
    }

    #[test]
    fn coplanar_fan_is_a_straight_edge() {
        let s = 0.5f64.sqrt();
        let dirs = vec![
            Vec3::x(),
            Vec3::new(s, s, 0.0),
            Vec3::y(),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
        ];
        let err = PolyhedralCone::new(dirs).unwrap_err();
        assert!(matches!(err, GeometryError::StraightEdge { .. } | GeometryError::DegenerateFace { .. }));
    }

    #[test]
    fn non_unit_direction_rejected() {
        let err = PolyhedralCone::new(vec![Vec3::x() * 1.1, Vec3::y(), Vec3::z()]).unwrap_err();
        assert!(matches!(err, GeometryError::NonUnitDirection { index: 0, .. }));
    }

    #[test]
    fn bow_tie_is_self_intersecting() {
        let z = 0.8f64;
        let r = (1.0 - z * z).sqrt();
        let at = |deg: f64| {
            let t = deg.to_radians();
            Vec3::new(r * t.cos(), r * t.sin(), z)
        };
        let dirs = vec![at(0.0), at(180.0), at(90.0), at(270.0)];
        let err = PolyhedralCone::new(dirs).unwrap_err();
        assert!(matches!(err, GeometryError::SelfIntersectingPolygon { .. }));
    }

    #[test]
    fn octant_distances() {
        let c = octant();
        assert_relative_eq!(c.dist_edge(0, &Vec3::new(0.0, 1.0, 1.0)).unwrap(), 2f64.sqrt());
        assert_relative_eq!(c.dist_edge(0, &Vec3::new(5.0, 1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(c.dist_edge(1, &(2.0 * Vec3::y())).unwrap(), 0.0);
        assert_relative_eq!(c.dist_boundary(&Vec3::new(1.0, 1.0, 1.0)), 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.dist_edge_set(&Vec3::new(1.0, 1.0, 1.0)), 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(c.dist_boundary(&Vec3::new(1.0, 2.0, 0.0)), 0.0);
        assert_relative_eq!(c.dist_vertex(&Vec3::new(3.0, 4.0, 0.0)), 5.0);
        assert!(matches!(
            c.dist_edge(3, &Vec3::zeros()),
            Err(GeometryError::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn interior_direction_of_octant_is_the_diagonal() {
        let q = octant().interior_direction();
        let d = Vec3::new(1.0, 1.0, 1.0).normalize();
        assert!((q - d).norm() < 1e-3, "{q:?}");
    }
}

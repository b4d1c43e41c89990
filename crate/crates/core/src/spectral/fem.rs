use super::sparse::{conjugate_gradient, dot, CsrMatrix};
use super::{SpectralError, SphericalMesh};
use crate::geometry::Vec3;

/// Area of the geodesic triangle `abc` on the unit sphere.
pub fn spherical_triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Dirichlet stiffness (cotangent weights on flat triangles) and lumped
/// spherical-area mass, restricted to interior nodes.
pub struct DirichletSystem {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    /// Mesh node index of each unknown.
    pub dofs: Vec<usize>,
}

pub fn assemble(mesh: &SphericalMesh) -> Result<DirichletSystem, SpectralError> {
    let n = mesh.nodes.len();
    let mut index = vec![usize::MAX; n];
    let mut dofs = Vec::new();
    for (i, slot) in index.iter_mut().enumerate() {
        if !mesh.boundary[i] {
            *slot = dofs.len();
            dofs.push(i);
        }
    }
    if dofs.is_empty() {
        return Err(SpectralError::NoInteriorNodes { level: mesh.level });
    }
    let mut mass = vec![0.0; dofs.len()];
    let mut trip = Vec::with_capacity(9 * mesh.triangles.len());
    for t in &mesh.triangles {
        let p = [mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2])];
        let area = spherical_triangle_area(&p[0], &p[1], &p[2]);
        for k in 0..3 {
            if index[t[k]] != usize::MAX {
                mass[index[t[k]]] += area / 3.0;
            }
        }
        for k in 0..3 {
            // Edge (i, j) opposite vertex k.
            let (i, j) = (t[(k + 1) % 3], t[(k + 2) % 3]);
            let u = p[(k + 1) % 3] - p[k];
            let v = p[(k + 2) % 3] - p[k];
            let w = 0.5 * u.dot(&v) / u.cross(&v).norm();
            let (ii, jj) = (index[i], index[j]);
            if ii != usize::MAX {
                trip.push((ii, ii, w));
            }
            if jj != usize::MAX {
                trip.push((jj, jj, w));
            }
            if ii != usize::MAX && jj != usize::MAX {
                trip.push((ii, jj, -w));
                trip.push((jj, ii, -w));
            }
        }
    }
    Ok(DirichletSystem {
        stiffness: CsrMatrix::from_triplets(dofs.len(), trip),
        mass,
        dofs,
    })
}

/// Smallest generalized eigenpair of `K x = λ M x` by inverse power iteration
/// with CG inner solves. Returns `(Rayleigh quotient, M-normalized vector)`.
pub fn inverse_iteration(
    sys: &DirichletSystem,
    start: Option<Vec<f64>>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>), SpectralError> {
    let n = sys.dofs.len();
    let m = &sys.mass;
    let mnorm = |x: &[f64]| x.iter().zip(m).map(|(x, m)| x * x * m).sum::<f64>().sqrt();
    let mut x = start.unwrap_or_else(|| vec![1.0; n]);
    let s = mnorm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut lambda = sys.stiffness.quadratic_form(&x);
    let cg_iter = 20 * n + 1000;
    for _ in 0..max_iter {
        let b: Vec<f64> = x.iter().zip(m).map(|(x, m)| x * m).collect();
        let mut y = x.iter().map(|v| v / lambda).collect::<Vec<_>>();
        conjugate_gradient(&sys.stiffness, &b, &mut y, 1e-11, cg_iter).ok_or(SpectralError::IterationStall)?;
        let s = mnorm(&y);
        y.iter_mut().for_each(|v| *v /= s);
        let new_lambda = sys.stiffness.quadratic_form(&y);
        let change = (new_lambda - lambda).abs();
        x = y;
        lambda = new_lambda;
        if change <= rel_tol * lambda {
            return Ok((rayleigh_quotient(sys, &x), x));
        }
    }
    Err(SpectralError::IterationStall)
}

pub fn rayleigh_quotient(sys: &DirichletSystem, x: &[f64]) -> f64 {
    let mx: Vec<f64> = x.iter().zip(&sys.mass).map(|(x, m)| x * m).collect();
    sys.stiffness.quadratic_form(x) / dot(x, &mx)
}

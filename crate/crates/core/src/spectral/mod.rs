//! First Dirichlet eigenvalue of the Laplace–Beltrami operator on a
//! spherical polygon, spherical areas and cap lower bounds.

mod fem;
mod mesh;
mod sparse;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

pub use fem::{assemble, inverse_iteration, rayleigh_quotient, spherical_triangle_area, DirichletSystem};
pub use mesh::{mesh_spherical_polygon, mesh_with_cap, SphericalMesh, NODE_CAP};
pub use sparse::{conjugate_gradient, CsrMatrix};

use crate::geometry::PolyhedralCone;
use crate::special::bessel_j0_first_zero;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("fan triangulation failed and ear clipping found no ear")]
    CentroidOutside,
    #[error("mesh would exceed {cap} nodes ({nodes})")]
    MeshTooLarge { nodes: usize, cap: usize },
    #[error("mesh at level {level} has no interior nodes")]
    NoInteriorNodes { level: usize },
    #[error("inverse power iteration did not converge")]
    IterationStall,
    #[error("area {0} outside (0, 4pi)")]
    AreaOutOfRange(f64),
    #[error("need at least two refinement levels")]
    TooFewLevels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenOptions {
    /// Relative change between successive levels that stops refinement.
    pub tol: f64,
    pub max_level: usize,
    pub node_cap: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-3,
            max_level: 9,
            node_cap: NODE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelValue {
    pub level: usize,
    pub nodes: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub value: f64,
    pub error_indicator: f64,
    pub levels_used: usize,
    pub converged: bool,
    pub history: Vec<LevelValue>,
    /// Interior-node eigenvector on `mesh`, normalized in the lumped mass norm.
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
    #[serde(skip)]
    pub mesh: SphericalMesh,
}

/// Eigenvalue on one mesh.
pub fn mesh_eigenvalue(mesh: &SphericalMesh) -> Result<(f64, Vec<f64>), SpectralError> {
    let sys = assemble(mesh)?;
    inverse_iteration(&sys, None, 1e-13, 500)
}

/// Eigenvalue on one mesh, started from nodal values (e.g. a prolongated
/// coarse eigenvector). Returns the eigenvector as nodal values too.
fn mesh_eigenvalue_nodal(mesh: &SphericalMesh, start: Option<&[f64]>) -> Result<(f64, Vec<f64>, Vec<f64>), SpectralError> {
    let sys = assemble(mesh)?;
    let x0 = start.map(|s| sys.dofs.iter().map(|&i| s[i]).collect::<Vec<_>>());
    let (value, x) = inverse_iteration(&sys, x0, 1e-13, 500)?;
    let mut nodal = vec![0.0; mesh.nodes.len()];
    for (k, &i) in sys.dofs.iter().enumerate() {
        nodal[i] = x[k];
    }
    Ok((value, x, nodal))
}

/// Refines uniformly until two successive levels agree to `opts.tol`
/// (relative) or the level/node budget runs out.
pub fn first_eigenvalue(cone: &PolyhedralCone, opts: &EigenOptions) -> Result<EigenResult, SpectralError> {
    let mut mesh = mesh_with_cap(cone, 0, opts.node_cap)?;
    let mut history: Vec<LevelValue> = Vec::new();
    let mut last: Option<(Vec<f64>, SphericalMesh)> = None;
    let mut converged = false;
    let mut nodal: Option<Vec<f64>> = None;
    loop {
        if mesh.num_interior() > 0 {
            let start = nodal.as_ref().map(|v| mesh.prolongate(v));
            let (value, vec, nod) = mesh_eigenvalue_nodal(&mesh, start.as_deref())?;
            nodal = Some(nod);
            history.push(LevelValue {
                level: mesh.level,
                nodes: mesh.nodes.len(),
                value,
            });
            last = Some((vec, mesh.clone()));
            if history.len() >= 2 {
                let prev = history[history.len() - 2].value;
                if (value - prev).abs() < opts.tol * value {
                    converged = true;
                    break;
                }
            }
        }
        if mesh.level >= opts.max_level {
            break;
        }
        match mesh.refine(opts.node_cap) {
            Ok(m) => mesh = m,
            Err(SpectralError::MeshTooLarge { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    if history.len() < 2 {
        return Err(SpectralError::TooFewLevels);
    }
    let n = history.len();
    let (eigenvector, mesh) = last.expect("at least one level solved");
    Ok(EigenResult {
        value: history[n - 1].value,
        error_indicator: (history[n - 1].value - history[n - 2].value).abs(),
        levels_used: n,
        converged,
        history,
        eigenvector,
        mesh,
    })
}

/// Area of `M` by spherical excess.
pub fn polygon_area(cone: &PolyhedralCone) -> f64 {
    cone.polygon_area()
}

/// Polar angle of the spherical cap with the given area.
pub fn cap_angle(area: f64) -> Result<f64, SpectralError> {
    if !(area > 0.0 && area < 4.0 * PI) {
        return Err(SpectralError::AreaOutOfRange(area));
    }
    Ok((1.0 - area / (2.0 * PI)).acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapBounds {
    pub log_bound: f64,
    /// Only defined for areas below `2π`.
    pub bessel_bound: Option<f64>,
    pub best: f64,
}

/// Lower bounds for `E0(M)` through the cap of equal area.
pub fn faber_krahn_lower_bounds(area: f64) -> Result<CapBounds, SpectralError> {
    if !(area > 0.0 && area < 4.0 * PI) {
        return Err(SpectralError::AreaOutOfRange(area));
    }
    let log_bound = 1.0 / (4.0 * PI / (4.0 * PI - area)).ln();
    let bessel_bound = if area < 2.0 * PI {
        let j0 = bessel_j0_first_zero().expect("Newton converges from 2.4");
        Some(0.25 * j0 * j0 * (4.0 * PI / area - 0.5) - 0.25)
    } else {
        None
    };
    let best = bessel_bound.map_or(log_bound, |b| b.max(log_bound));
    Ok(CapBounds {
        log_bound,
        bessel_bound,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_domain, Domain};
    use approx::assert_relative_eq;

    fn cone(name: &str) -> PolyhedralCone {
        match builtin_domain(name).unwrap() {
            Domain::Cone(c) => c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn octant_eigenvalue_is_twelve() {
        let r = first_eigenvalue(&cone("octant"), &EigenOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 12.0).abs() < 0.24, "{r:?}");
        // Rayleigh certificate.
        let sys = assemble(&r.mesh).unwrap();
        assert_relative_eq!(rayleigh_quotient(&sys, &r.eigenvector), r.value, max_relative = 1e-10);
    }

    #[test]
    fn octant_convergence_contracts() {
        let c = cone("octant");
        let vals: Vec<f64> = (2..=7)
            .map(|l| mesh_eigenvalue(&mesh_spherical_polygon(&c, l).unwrap()).unwrap().0)
            .collect();
        for w in vals.windows(3) {
            let d1 = (w[1] - w[0]).abs();
            let d2 = (w[2] - w[1]).abs();
            assert!(d2 * 2.0 <= d1, "{vals:?}");
        }
    }

    #[test]
    fn smaller_triangle_has_larger_eigenvalue() {
        let big = PolyhedralCone::regular(3, 0.6).unwrap();
        let small = PolyhedralCone::regular(3, 0.3).unwrap();
        let opts = EigenOptions::default();
        let eb = first_eigenvalue(&big, &opts).unwrap().value;
        let es = first_eigenvalue(&small, &opts).unwrap().value;
        assert!(es > eb);
    }

    #[test]
    fn cap_angles_and_bounds() {
        assert_relative_eq!(cap_angle(2.0 * PI).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(cap_angle(PI / 2.0).unwrap(), 0.75f64.acos(), epsilon = 1e-15);
        assert!(cap_angle(1e-12).unwrap() < 1e-5);
        assert!(cap_angle(0.0).is_err());
        let b = faber_krahn_lower_bounds(2.0 * PI).unwrap();
        assert_relative_eq!(b.log_bound, 1.0 / 2f64.ln(), epsilon = 1e-15);
        assert!(b.bessel_bound.is_none());
        let b = faber_krahn_lower_bounds(PI / 2.0).unwrap();
        assert!(b.log_bound <= 12.0 && b.bessel_bound.unwrap() <= 12.0);
        assert!(faber_krahn_lower_bounds(4.0 * PI - 1e-9).unwrap().log_bound < 0.1);
    }
}

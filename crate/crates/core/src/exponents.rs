//! Critical exponents at vertices and edges, admissible weight ranges and
//! the Platonic reference values.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Domain, PlatonicSolid, PolyhedralCone, ANGLE_TOL};
use crate::spectral::{first_eigenvalue, EigenOptions, SpectralError};
use crate::weights::WeightParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error("eigenvalue must be positive, got {0}")]
    NonpositiveEigenvalue(f64),
    #[error("parabolicity constants must satisfy 0 < nu1 <= nu2, got nu1 = {nu1}, nu2 = {nu2}")]
    BadParabolicity { nu1: f64, nu2: f64 },
    #[error("edge angle {0} must lie in (0, 2pi) and differ from pi")]
    StraightEdge(f64),
    #[error("unknown Platonic solid '{0}'")]
    UnknownSolid(String),
    #[error("weight parameters do not match the report: {0}")]
    DimensionMismatch(String),
    #[error("no exponents for a {0}")]
    UnsupportedDomain(&'static str),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn check_nu(nu1: f64, nu2: f64) -> Result<(), ExponentError> {
    if nu1 > 0.0 && nu1 <= nu2 && nu2.is_finite() {
        Ok(())
    } else {
        Err(ExponentError::BadParabolicity { nu1, nu2 })
    }
}

fn check_kappa(kappa: f64) -> Result<(), ExponentError> {
    if kappa > 0.0 && kappa < 2.0 * PI && (kappa - PI).abs() > ANGLE_TOL {
        Ok(())
    } else {
        Err(ExponentError::StraightEdge(kappa))
    }
}

/// `-1/2 + sqrt(E0 + 1/4)`: vertex exponent of the heat operator.
pub fn vertex_exponent_heat(e0: f64) -> Result<f64, ExponentError> {
    if !(e0 > 0.0) {
        return Err(ExponentError::NonpositiveEigenvalue(e0));
    }
    Ok(-0.5 + (e0 + 0.25).sqrt())
}

/// `-3/2 + sqrt(nu1/nu2) sqrt(E0 + 1/4)`, reported raw (may be `<= 0`).
pub fn vertex_exponent_lower(e0: f64, nu1: f64, nu2: f64) -> Result<f64, ExponentError> {
    if !(e0 > 0.0) {
        return Err(ExponentError::NonpositiveEigenvalue(e0));
    }
    check_nu(nu1, nu2)?;
    Ok(-1.5 + (nu1 / nu2).sqrt() * (e0 + 0.25).sqrt())
}

/// `π/κ`: edge exponent of the heat operator.
pub fn edge_exponent_heat(kappa: f64) -> Result<f64, ExponentError> {
    check_kappa(kappa)?;
    Ok(PI / kappa)
}

/// `-1 + sqrt(nu1/nu2) π/κ`, reported raw (may be `<= 0`).
pub fn edge_exponent_lower(kappa: f64, nu1: f64, nu2: f64) -> Result<f64, ExponentError> {
    check_kappa(kappa)?;
    check_nu(nu1, nu2)?;
    Ok(-1.0 + (nu1 / nu2).sqrt() * PI / kappa)
}

/// Value for `L` (plus) and for the adjoint `L̃` (minus). The formulas do not
/// distinguish them, so both slots hold the same number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlusMinus {
    pub plus: f64,
    pub minus: f64,
}

impl PlusMinus {
    fn same(v: f64) -> Self {
        PlusMinus { plus: v, minus: v }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexExponent {
    pub vertex: usize,
    pub e0: f64,
    pub e0_error: f64,
    pub solid_angle: f64,
    #[serde(rename = "vertex_exact")]
    pub exact: PlusMinus,
    #[serde(rename = "vertex_lower")]
    pub lower: PlusMinus,
    /// Upper end of the usable range `(0, upper)`.
    pub range_upper: PlusMinus,
    /// The lower bound was `<= 0` and the range was floored at `0+`.
    pub floored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeExponent {
    pub edge: usize,
    pub kappa: f64,
    #[serde(rename = "edge_exact")]
    pub exact: PlusMinus,
    #[serde(rename = "edge_lower")]
    pub lower: PlusMinus,
    pub range_upper: PlusMinus,
    pub floored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub domain: &'static str,
    pub nu1: f64,
    pub nu2: f64,
    /// Ranges use the exact heat values (`true`) or the general lower bounds.
    pub heat: bool,
    pub vertices: Vec<VertexExponent>,
    pub edges: Vec<EdgeExponent>,
    pub notes: Vec<String>,
}

/// Key identifying a spherical polygon up to rotation and reflection.
fn congruence_key(cone: &PolyhedralCone) -> Vec<(i64, i64)> {
    let n = cone.num_edges();
    let q = |v: f64| (v * 1e8).round() as i64;
    let dirs = cone.directions();
    let side = |i: usize| dirs[i].dot(&dirs[(i + 1) % n]).clamp(-1.0, 1.0).acos();
    let fwd: Vec<(i64, i64)> = (0..n).map(|i| (q(cone.inner_angles()[i]), q(side(i)))).collect();
    let bwd: Vec<(i64, i64)> = (0..n)
        .map(|i| {
            let k = (n - i) % n;
            (q(cone.inner_angles()[k]), q(side((k + n - 1) % n)))
        })
        .collect();
    let mut best: Option<Vec<(i64, i64)>> = None;
    for seq in [fwd, bwd] {
        for s in 0..n {
            let rot: Vec<_> = seq[s..].iter().chain(&seq[..s]).copied().collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.unwrap()
}

fn range(exact: f64, lower: f64, heat: bool) -> (f64, bool) {
    let bound = if heat { exact } else { lower };
    if bound > 0.0 {
        (bound, false)
    } else {
        (0.0, true)
    }
}

fn vertex_entry(
    vertex: usize,
    cone: &PolyhedralCone,
    e0: f64,
    e0_error: f64,
    nu1: f64,
    nu2: f64,
    heat: bool,
) -> Result<VertexExponent, ExponentError> {
    let exact = vertex_exponent_heat(e0)?;
    let lower = vertex_exponent_lower(e0, nu1, nu2)?;
    let (upper, floored) = range(exact, lower, heat);
    Ok(VertexExponent {
        vertex,
        e0,
        e0_error,
        solid_angle: cone.polygon_area(),
        exact: PlusMinus::same(exact),
        lower: PlusMinus::same(lower),
        range_upper: PlusMinus::same(upper),
        floored,
    })
}

fn edge_entry(edge: usize, kappa: f64, nu1: f64, nu2: f64, heat: bool) -> Result<EdgeExponent, ExponentError> {
    let exact = edge_exponent_heat(kappa)?;
    let lower = edge_exponent_lower(kappa, nu1, nu2)?;
    let (upper, floored) = range(exact, lower, heat);
    Ok(EdgeExponent {
        edge,
        kappa,
        exact: PlusMinus::same(exact),
        lower: PlusMinus::same(lower),
        range_upper: PlusMinus::same(upper),
        floored,
    })
}

/// Exponents for every vertex and edge of `domain`. Vertex eigenvalues come
/// from the spectral solver; congruent vertex cones are solved once.
pub fn exponent_report(
    domain: &Domain,
    nu1: f64,
    nu2: f64,
    heat: bool,
    eigen: &EigenOptions,
) -> Result<ExponentReport, ExponentError> {
    check_nu(nu1, nu2)?;
    let mut notes = Vec::new();
    if heat && nu1 != nu2 {
        notes.push("heat ranges requested with nu1 != nu2; exact values assume the heat operator".into());
    }
    let mut cache: HashMap<Vec<(i64, i64)>, (f64, f64)> = HashMap::new();
    let mut solve = |cone: &PolyhedralCone| -> Result<(f64, f64), ExponentError> {
        let key = congruence_key(cone);
        if let Some(v) = cache.get(&key) {
            return Ok(*v);
        }
        let r = first_eigenvalue(cone, eigen)?;
        cache.insert(key, (r.value, r.error_indicator));
        Ok((r.value, r.error_indicator))
    };
    let (vertices, edges) = match domain {
        Domain::Cone(c) => {
            let (e0, err) = solve(c)?;
            let v = vec![vertex_entry(0, c, e0, err, nu1, nu2, heat)?];
            let e = c
                .inner_angles()
                .iter()
                .enumerate()
                .map(|(i, &k)| edge_entry(i, k, nu1, nu2, heat))
                .collect::<Result<Vec<_>, _>>()?;
            (v, e)
        }
        Domain::Polyhedron(p) => {
            let mut v = Vec::new();
            for (i, c) in p.vertex_cones().iter().enumerate() {
                let (e0, err) = solve(c)?;
                v.push(vertex_entry(i, c, e0, err, nu1, nu2, heat)?);
            }
            let e = p
                .edges()
                .iter()
                .enumerate()
                .map(|(j, e)| edge_entry(j, e.kappa, nu1, nu2, heat))
                .collect::<Result<Vec<_>, _>>()?;
            (v, e)
        }
        Domain::Wedge(w) => (Vec::new(), vec![edge_entry(0, w.kappa(), nu1, nu2, heat)?]),
        other => return Err(ExponentError::UnsupportedDomain(other.name())),
    };
    if vertices.iter().any(|v| v.floored) || edges.iter().any(|e| e.floored) {
        notes.push(
            "some lower bounds are <= 0: the exponent is still positive, but no positive value is certified, so those ranges are empty".into(),
        );
    }
    notes.push("plus/minus slots are filled by the same formulas; asymmetry is not quantified".into());
    Ok(ExponentReport {
        domain: domain.name(),
        nu1,
        nu2,
        heat,
        vertices,
        edges,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCheck {
    pub component: String,
    pub value: f64,
    pub upper: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub checks: Vec<ComponentCheck>,
}

/// Whether every component of `params` lies in the open range `(0, upper)`.
/// `heat` selects exact heat values, otherwise lower bounds (floored at 0).
pub fn admissible(params: &WeightParams, report: &ExponentReport, heat: bool) -> Result<Admissibility, ExponentError> {
    let (vs, es): (Vec<f64>, &Vec<f64>) = match params {
        WeightParams::Cone { vertex, edges } => (vec![*vertex], edges),
        WeightParams::Polyhedron { vertices, edges } => (vertices.clone(), edges),
    };
    if vs.len() != report.vertices.len() || es.len() != report.edges.len() {
        return Err(ExponentError::DimensionMismatch(format!(
            "report has {} vertices and {} edges, parameters have {} and {}",
            report.vertices.len(),
            report.edges.len(),
            vs.len(),
            es.len()
        )));
    }
    let upper_of = |exact: f64, lower: f64| if heat { exact } else { lower.max(0.0) };
    let mut checks = Vec::new();
    for (v, entry) in vs.iter().zip(&report.vertices) {
        let upper = upper_of(entry.exact.plus, entry.lower.plus);
        checks.push(ComponentCheck {
            component: format!("vertex {}", entry.vertex),
            value: *v,
            upper,
            ok: *v > 0.0 && *v < upper,
        });
    }
    for (v, entry) in es.iter().zip(&report.edges) {
        let upper = upper_of(entry.exact.plus, entry.lower.plus);
        checks.push(ComponentCheck {
            component: format!("edge {}", entry.edge),
            value: *v,
            upper,
            ok: *v > 0.0 && *v < upper,
        });
    }
    Ok(Admissibility {
        admissible: checks.iter().all(|c| c.ok),
        checks,
    })
}

/// Closed-form inner angle at edges and solid angle at vertices of a Platonic solid.
pub fn platonic_reference(name: &str) -> Result<(f64, f64), ExponentError> {
    let solid: PlatonicSolid = name.parse().map_err(|_| ExponentError::UnknownSolid(name.to_string()))?;
    Ok(match solid {
        PlatonicSolid::Tetrahedron => ((2.0 * 2f64.sqrt()).atan(), (23.0f64 / 27.0).acos()),
        PlatonicSolid::Cube => (PI / 2.0, PI / 2.0),
        PlatonicSolid::Octahedron => (PI - (2.0 * 2f64.sqrt()).atan(), 4.0 * (1.0f64 / 3.0).asin()),
        PlatonicSolid::Dodecahedron => (PI - 2f64.atan(), PI - (2.0f64 / 11.0).atan()),
        PlatonicSolid::Icosahedron => (
            PI - (2.0 * 5f64.sqrt() / 5.0).atan(),
            2.0 * PI - 5.0 * (2.0f64 / 3.0).asin(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_domain;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_exponents() {
        assert_eq!(vertex_exponent_heat(12.0).unwrap(), 3.0);
        assert_eq!(vertex_exponent_heat(2.0).unwrap(), 1.0);
        assert_eq!(vertex_exponent_heat(0.75).unwrap(), 0.5);
        assert_eq!(vertex_exponent_lower(12.0, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(vertex_exponent_lower(2.0, 1.0, 4.0).unwrap(), -0.75);
        assert_eq!(vertex_exponent_lower(2.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(edge_exponent_heat(PI / 2.0).unwrap(), 2.0);
        assert_relative_eq!(edge_exponent_heat(1.5 * PI).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(
            edge_exponent_heat((2.0 * 2f64.sqrt()).atan()).unwrap(),
            2.55215,
            epsilon = 1e-5
        );
        assert!(matches!(edge_exponent_heat(PI), Err(ExponentError::StraightEdge(_))));
        assert!(matches!(
            vertex_exponent_lower(2.0, 2.0, 1.0),
            Err(ExponentError::BadParabolicity { .. })
        ));
        assert!(vertex_exponent_heat(0.0).is_err());
    }

    #[test]
    fn octant_admissibility() {
        let d = builtin_domain("octant").unwrap();
        let report = exponent_report(&d, 1.0, 1.0, true, &EigenOptions::default()).unwrap();
        assert!((report.vertices[0].exact.plus - 3.0).abs() < 0.05);
        // Use the exact oracle value to make the boundary test sharp.
        let mut report = report;
        report.vertices[0].exact = PlusMinus::same(3.0);
        let ok = WeightParams::Cone {
            vertex: 2.9,
            edges: vec![1.9; 3],
        };
        assert!(admissible(&ok, &report, true).unwrap().admissible);
        let at_bound = WeightParams::Cone {
            vertex: 3.0,
            edges: vec![1.9; 3],
        };
        assert!(!admissible(&at_bound, &report, true).unwrap().admissible);
        let zero_edge = WeightParams::Cone {
            vertex: 2.9,
            edges: vec![0.0, 1.9, 1.9],
        };
        assert!(!admissible(&zero_edge, &report, true).unwrap().admissible);
    }

    #[test]
    fn floored_lower_bounds_make_ranges_empty() {
        let d = builtin_domain("octant").unwrap();
        let report = exponent_report(&d, 0.01, 1.0, false, &EigenOptions::default()).unwrap();
        assert!(report.vertices[0].floored);
        assert!(report.edges.iter().all(|e| e.floored));
        let p = WeightParams::Cone {
            vertex: 0.1,
            edges: vec![0.1; 3],
        };
        assert!(!admissible(&p, &report, false).unwrap().admissible);
    }

    #[test]
    fn platonic_reference_values() {
        assert_eq!(platonic_reference("cube").unwrap(), (PI / 2.0, PI / 2.0));
        assert!(platonic_reference("sphere").is_err());
    }
}

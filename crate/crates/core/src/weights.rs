//! Mixed weights `I(x, r; Λ)` on cones and polyhedrons, the polyhedron
//! weight `I_∞`, the Gaussian factor and the regime simplifications.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Domain, Location, PolyhedralCone, Polyhedron, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("point {0:?} lies outside the domain")]
    PointOutsideDomain([f64; 3]),
    #[error("radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("time increment must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("decay constant sigma must be positive, got {0}")]
    NonpositiveSigma(f64),
    #[error("weight parameters do not match the domain: {0}")]
    DimensionMismatch(String),
    #[error("weight exponents must be positive: {0}")]
    NonpositiveExponent(String),
    #[error("regime not applicable at this point: {0}")]
    ModeInapplicable(String),
    #[error("weights are defined for cones and polyhedrons, not {0}")]
    UnsupportedDomain(&'static str),
}

/// Exponents `Λ` of the mixed weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum WeightParams {
    /// `(λ_o, λ_{e,1}, …, λ_{e,N0})`.
    Cone { vertex: f64, edges: Vec<f64> },
    /// `((λ_{v,i})_i, (λ_{e,j})_j)`.
    Polyhedron { vertices: Vec<f64>, edges: Vec<f64> },
}

impl WeightParams {
    /// Same vertex exponent at every vertex and same edge exponent at every edge.
    pub fn uniform(domain: &Domain, vertex: f64, edge: f64) -> Result<Self, WeightError> {
        match domain {
            Domain::Cone(c) => Ok(WeightParams::Cone {
                vertex,
                edges: vec![edge; c.num_edges()],
            }),
            Domain::Polyhedron(p) => Ok(WeightParams::Polyhedron {
                vertices: vec![vertex; p.vertices().len()],
                edges: vec![edge; p.edges().len()],
            }),
            other => Err(WeightError::UnsupportedDomain(other.name())),
        }
    }

    /// Checks dimensions against `domain` and positivity of every component.
    pub fn validate(&self, domain: &Domain) -> Result<(), WeightError> {
        let all: Vec<f64> = match (self, domain) {
            (WeightParams::Cone { vertex, edges }, Domain::Cone(c)) => {
                if edges.len() != c.num_edges() {
                    return Err(WeightError::DimensionMismatch(format!(
                        "cone has {} edges, got {} edge exponents",
                        c.num_edges(),
                        edges.len()
                    )));
                }
                std::iter::once(*vertex).chain(edges.iter().copied()).collect()
            }
            (WeightParams::Polyhedron { vertices, edges }, Domain::Polyhedron(p)) => {
                if vertices.len() != p.vertices().len() || edges.len() != p.edges().len() {
                    return Err(WeightError::DimensionMismatch(format!(
                        "polyhedron has {} vertices and {} edges, got {} and {} exponents",
                        p.vertices().len(),
                        p.edges().len(),
                        vertices.len(),
                        edges.len()
                    )));
                }
                vertices.iter().chain(edges).copied().collect()
            }
            (_, Domain::Cone(_)) | (_, Domain::Polyhedron(_)) => {
                return Err(WeightError::DimensionMismatch(format!(
                    "parameter form does not match a {}",
                    domain.name()
                )))
            }
            (_, other) => return Err(WeightError::UnsupportedDomain(other.name())),
        };
        if let Some(v) = all.iter().find(|v| !(**v > 0.0)) {
            return Err(WeightError::NonpositiveExponent(format!("component {v}")));
        }
        Ok(())
    }
}

fn check_point(domain: &Domain, x: &Vec3) -> Result<bool, WeightError> {
    match domain.classify(x) {
        Location::Outside => Err(WeightError::PointOutsideDomain([x.x, x.y, x.z])),
        Location::Boundary => Ok(false),
        Location::Inside => Ok(true),
    }
}

fn check_radius(r: f64) -> Result<(), WeightError> {
    if r > 0.0 {
        Ok(())
    } else {
        Err(WeightError::NonpositiveRadius(r))
    }
}

/// Cone weight from precomputed distances. Zero on the boundary.
fn cone_formula(cone: &PolyhedralCone, vertex: f64, edges: &[f64], x: &Vec3, r: f64) -> f64 {
    let dv = x.norm();
    let db = cone.dist_boundary(x);
    if dv == 0.0 || db == 0.0 {
        return 0.0;
    }
    let mut w = (dv / r).min(1.0).powf(vertex);
    let dvr = dv.min(r);
    let mut de_min = f64::INFINITY;
    for (i, lam) in edges.iter().enumerate() {
        let de = cone.dist_edge(i, x).expect("index in range");
        de_min = de_min.min(de);
        w *= (de.min(r) / dvr).powf(*lam);
    }
    w * db.min(r) / de_min.min(r)
}

/// `I(x, r; Λ)` on a polyhedral cone.
pub fn weight_cone(cone: &PolyhedralCone, params: &WeightParams, x: &Vec3, r: f64) -> Result<f64, WeightError> {
    check_radius(r)?;
    let domain = Domain::Cone(cone.clone());
    params.validate(&domain)?;
    let WeightParams::Cone { vertex, edges } = params else {
        unreachable!("validated above")
    };
    if !check_point(&domain, x)? {
        return Ok(0.0);
    }
    Ok(cone_formula(cone, *vertex, edges, x, r))
}

/// Polyhedron weight with optional cap `r` (`None` for the uncapped `I_∞`).
fn poly_formula(poly: &Polyhedron, vertices: &[f64], edges: &[f64], x: &Vec3, r: Option<f64>) -> f64 {
    let cap = |d: f64| r.map_or(d, |r| d.min(r));
    let db = poly.dist_boundary(x);
    if db == 0.0 {
        return 0.0;
    }
    let mut w = 1.0;
    for (i, lam) in vertices.iter().enumerate() {
        let d = poly.dist_vertex(i, x);
        let base = match r {
            Some(r) => (d / r).min(1.0),
            None => d,
        };
        w *= base.powf(*lam);
    }
    let mut de_min = f64::INFINITY;
    for (j, lam) in edges.iter().enumerate() {
        let de = poly.dist_edge(j, x).expect("index in range");
        de_min = de_min.min(de);
        let dve = poly.dist_edge_endpoints(j, x);
        w *= (cap(de) / cap(dve)).powf(*lam);
    }
    w * cap(db) / cap(de_min)
}

/// `I(x, r; Λ)` on a polyhedron.
pub fn weight_poly(poly: &Polyhedron, params: &WeightParams, x: &Vec3, r: f64) -> Result<f64, WeightError> {
    check_radius(r)?;
    let domain = Domain::Polyhedron(poly.clone());
    params.validate(&domain)?;
    let WeightParams::Polyhedron { vertices, edges } = params else {
        unreachable!("validated above")
    };
    if !check_point(&domain, x)? {
        return Ok(0.0);
    }
    Ok(poly_formula(poly, vertices, edges, x, Some(r)))
}

/// Uncapped polyhedron weight `I_∞(x; Λ)`.
pub fn weight_poly_inf(poly: &Polyhedron, params: &WeightParams, x: &Vec3) -> Result<f64, WeightError> {
    let domain = Domain::Polyhedron(poly.clone());
    params.validate(&domain)?;
    let WeightParams::Polyhedron { vertices, edges } = params else {
        unreachable!("validated above")
    };
    if !check_point(&domain, x)? {
        return Ok(0.0);
    }
    Ok(poly_formula(poly, vertices, edges, x, None))
}

/// Dispatches to the cone or polyhedron weight.
pub fn weight(domain: &Domain, params: &WeightParams, x: &Vec3, r: f64) -> Result<f64, WeightError> {
    match domain {
        Domain::Cone(c) => weight_cone(c, params, x, r),
        Domain::Polyhedron(p) => weight_poly(p, params, x, r),
        other => Err(WeightError::UnsupportedDomain(other.name())),
    }
}

/// Precomputed evaluator that skips the per-call validation; for grids.
pub struct WeightEvaluator<'a> {
    domain: &'a Domain,
    params: &'a WeightParams,
}

impl<'a> WeightEvaluator<'a> {
    pub fn new(domain: &'a Domain, params: &'a WeightParams) -> Result<Self, WeightError> {
        params.validate(domain)?;
        Ok(WeightEvaluator { domain, params })
    }

    /// Weight at `x`, zero outside or on the boundary.
    pub fn eval(&self, x: &Vec3, r: f64) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        match (self.domain, self.params) {
            (Domain::Cone(c), WeightParams::Cone { vertex, edges }) => cone_formula(c, *vertex, edges, x, r),
            (Domain::Polyhedron(p), WeightParams::Polyhedron { vertices, edges }) => {
                poly_formula(p, vertices, edges, x, Some(r))
            }
            _ => unreachable!("validated in new"),
        }
    }
}

/// `dt^{-3/2} exp(-σ |dx|² / dt)`.
pub fn gaussian_factor(dt: f64, dx: &Vec3, sigma: f64) -> Result<f64, WeightError> {
    if !(dt > 0.0) {
        return Err(WeightError::NonpositiveTime(dt));
    }
    if !(sigma > 0.0) {
        return Err(WeightError::NonpositiveSigma(sigma));
    }
    Ok(dt.powf(-1.5) * (-sigma * dx.norm_squared() / dt).exp())
}

/// Asymptotic regimes in which the weight collapses to fewer factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimplifiedMode {
    /// Keep only the nearest edge (and, for a polyhedron, nearest vertex).
    NearestEdge,
    /// `x/|x|` at angular distance at least `δ` from every edge.
    AwayFromEdges,
    /// `x/|x|` at angular distance at least `δ` from the boundary.
    AwayFromBoundary,
}

/// Simplified weight in a regime whose hypothesis is checked with separation `delta`.
pub fn simplified_weight(
    domain: &Domain,
    params: &WeightParams,
    x: &Vec3,
    r: f64,
    mode: SimplifiedMode,
    delta: f64,
) -> Result<f64, WeightError> {
    check_radius(r)?;
    params.validate(domain)?;
    if !check_point(domain, x)? {
        return Ok(0.0);
    }
    match (domain, params) {
        (Domain::Cone(c), WeightParams::Cone { vertex, edges }) => {
            let dv = x.norm();
            let db = c.dist_boundary(x);
            let de = c.dist_edge_set(x);
            let vfac = (dv / r).min(1.0);
            match mode {
                SimplifiedMode::NearestEdge => {
                    let k = c.nearest_edge(x);
                    for i in 0..c.num_edges() {
                        if i != k && c.dist_edge(i, x).unwrap() < delta * dv {
                            return Err(WeightError::ModeInapplicable(format!(
                                "edge {i} is within relative distance {delta} as well as the nearest edge {k}"
                            )));
                        }
                    }
                    let dk = c.dist_edge(k, x).unwrap();
                    Ok(vfac.powf(*vertex) * (dk.min(r) / dv.min(r)).powf(edges[k]) * db.min(r) / dk.min(r))
                }
                SimplifiedMode::AwayFromEdges => {
                    if de < delta * dv {
                        return Err(WeightError::ModeInapplicable(format!(
                            "d(x, E)/d(x, V) = {} < {delta}",
                            de / dv
                        )));
                    }
                    Ok(vfac.powf(vertex - 1.0) * (db / r).min(1.0))
                }
                SimplifiedMode::AwayFromBoundary => {
                    if db < delta * dv {
                        return Err(WeightError::ModeInapplicable(format!(
                            "d(x, dD)/d(x, V) = {} < {delta}",
                            db / dv
                        )));
                    }
                    Ok(vfac.powf(*vertex))
                }
            }
        }
        (Domain::Polyhedron(p), WeightParams::Polyhedron { vertices, edges }) => match mode {
            SimplifiedMode::NearestEdge => {
                // Nearest vertex V_k and nearest edge E_l.
                let k = p.nearest_vertex(x);
                let l = p.nearest_edge(x);
                let dvk = p.dist_vertex(k, x);
                let del = p.dist_edge(l, x).expect("index in range");
                let db = p.dist_boundary(x);
                Ok((dvk / r).min(1.0).powf(vertices[k]) * (del.min(r) / dvk.min(r)).powf(edges[l]) * db.min(r)
                    / del.min(r))
            }
            _ => Err(WeightError::ModeInapplicable(
                "only the nearest-edge regime is stated for polyhedrons".into(),
            )),
        },
        _ => unreachable!("validated above"),
    }
}

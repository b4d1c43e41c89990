use serde::Serialize;

use super::{adaptive_survival, approach_point, weighted_fit, Feature, McParams, VerifyError};
use crate::exponents::{edge_exponent_heat, vertex_exponent_heat};
use crate::geometry::{Domain, Vec3};
use crate::sde_mc::CoefficientSchedule;
use crate::spectral::{first_eigenvalue, EigenOptions};

/// Points discarded from the near end when their relative error exceeds this.
const DISCARD_REL_ERROR: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPoint {
    pub distance: f64,
    pub x: [f64; 3],
    pub value: f64,
    pub stderr: f64,
    pub count: usize,
    pub paths: usize,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub feature: Feature,
    /// Caloric function sampled along the approach: survival probability
    /// `P_x(τ > t)` of the diffusion started at `x`.
    pub observable: &'static str,
    pub t: f64,
    pub points: Vec<DecayPoint>,
    pub exponent: f64,
    pub stderr: f64,
    /// Two-standard-error interval.
    pub ci: (f64, f64),
    /// Exact heat-operator exponent of the feature, when known.
    pub reference: Option<f64>,
}

/// Number of approach points and the ratio between the largest and smallest distance.
fn sequence(feature: Feature) -> (usize, f64) {
    match feature {
        Feature::Face(_) => (7, 8.0),
        _ => (6, 6.0),
    }
}

fn reference_exponent(domain: &Domain, feature: Feature) -> Result<Option<f64>, VerifyError> {
    Ok(match (domain, feature) {
        (_, Feature::Face(_)) => Some(1.0),
        (Domain::Wedge(w), Feature::Edge(_)) => Some(edge_exponent_heat(w.kappa())?),
        (Domain::Cone(c), Feature::Edge(i)) => Some(edge_exponent_heat(c.inner_angles()[i])?),
        (Domain::Polyhedron(p), Feature::Edge(j)) => Some(edge_exponent_heat(p.edges()[j].kappa)?),
        (Domain::Cone(c), Feature::Vertex(_)) => {
            Some(vertex_exponent_heat(first_eigenvalue(c, &EigenOptions::default()).map_err(crate::exponents::ExponentError::from)?.value)?)
        }
        (Domain::Polyhedron(p), Feature::Vertex(i)) => Some(vertex_exponent_heat(
            first_eigenvalue(&p.vertex_cones()[i], &EigenOptions::default())
                .map_err(crate::exponents::ExponentError::from)?
                .value,
        )?),
        _ => None,
    })
}

/// Fits the power `λ` in `u(t, x) ≈ C d(x, feature)^λ` from survival
/// probabilities along a geometric approach sequence starting at distance `r`.
/// Near points whose relative error exceeds 30% are dropped (at most two).
pub fn fit_decay(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    feature: Feature,
    t: f64,
    r: f64,
    mc: &McParams,
) -> Result<DecayFit, VerifyError> {
    if !(t > 0.0) || !(r > 0.0) {
        return Err(VerifyError::Unsupported("decay fit needs t > 0 and r > 0".into()));
    }
    let (foot, dir) = approach_point(domain, feature)?;
    let (count, span) = sequence(feature);
    let q = span.powf(1.0 / (count - 1) as f64);
    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let distance = r / q.powi(k as i32);
        let x: Vec3 = foot + distance * dir;
        let (alive, paths) = adaptive_survival(domain, schedule, 0.0, &x, t, mc, k as u64)?;
        let p = alive as f64 / paths as f64;
        points.push(DecayPoint {
            distance,
            x: [x.x, x.y, x.z],
            value: p,
            stderr: (p * (1.0 - p) / paths as f64).sqrt(),
            count: alive,
            paths,
            used: alive > 0,
        });
    }
    let rel = |p: &DecayPoint| if p.count > 0 { p.stderr / p.value } else { f64::INFINITY };
    for p in points.iter_mut().rev().take(2) {
        if rel(p) > DISCARD_REL_ERROR {
            p.used = false;
        }
    }
    let used: Vec<&DecayPoint> = points.iter().filter(|p| p.used).collect();
    if used.len() < 3 {
        return Err(VerifyError::SignalBelowNoise(format!(
            "only {} approach points toward {feature} have survivors",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| p.distance.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.value.ln()).collect();
    let ws: Vec<f64> = used.iter().map(|p| (p.value / p.stderr.max(1e-12 * p.value)).powi(2)).collect();
    let (slope, se, _) = weighted_fit(&xs, &ys, &ws);
    Ok(DecayFit {
        feature,
        observable: "survival",
        t,
        points,
        exponent: slope,
        stderr: se,
        ci: (slope - 2.0 * se, slope + 2.0 * se),
        reference: reference_exponent(domain, feature)?,
    })
}

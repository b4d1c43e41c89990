use std::f64::consts::PI;

use serde::Serialize;

use super::{CoefficientSchedule, KilledEnsemble, SdeError};
use crate::geometry::{Domain, Vec3};
use crate::sampling::halton_ball;

/// Quasi-Monte Carlo points used for windows that meet the boundary.
const VOLUME_POINTS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenEstimate {
    pub value: f64,
    pub stderr: f64,
    pub h: f64,
    pub count: usize,
    pub volume: f64,
}

/// `|B_h(x) ∩ D|`: exact for balls inside the domain, Halton quadrature otherwise.
pub fn window_volume(domain: &Domain, x: &Vec3, h: f64) -> f64 {
    let ball = 4.0 / 3.0 * PI * h.powi(3);
    if domain.contains(x) && domain.dist_boundary(x) >= h {
        return ball;
    }
    let pts = halton_ball(VOLUME_POINTS);
    let inside = pts.iter().filter(|p| domain.contains(&(x + h * *p))).count();
    ball * inside as f64 / VOLUME_POINTS as f64
}

/// `min(0.4 sqrt(ν₁ (t - s)), d(x, ∂D) / 2)`, or the first term alone when
/// `x` is on or outside the boundary.
pub fn default_window(domain: &Domain, schedule: &CoefficientSchedule, s: f64, t: f64, x: &Vec3) -> f64 {
    let h = 0.4 * (schedule.nu1() * (t - s)).sqrt();
    let d = domain.dist_boundary(x);
    if domain.contains(x) && d > 0.0 {
        h.min(0.5 * d)
    } else {
        h
    }
}

/// Window estimate from terminal positions of survivors out of `n` paths.
pub fn estimate_green_from<'a>(
    domain: &Domain,
    terminals: impl IntoIterator<Item = &'a Vec3>,
    n: usize,
    x: &Vec3,
    h: f64,
) -> Result<GreenEstimate, SdeError> {
    if !(h > 0.0) {
        return Err(SdeError::NonpositiveWindow(h));
    }
    if n == 0 {
        return Err(SdeError::NoPaths);
    }
    let volume = window_volume(domain, x, h);
    if volume <= 0.0 {
        return Err(SdeError::EmptyWindowVolume);
    }
    let h2 = h * h;
    let count = terminals.into_iter().filter(|p| (*p - x).norm_squared() < h2).count();
    let p = count as f64 / n as f64;
    Ok(GreenEstimate {
        value: p / volume,
        stderr: (p * (1.0 - p) / n as f64).sqrt() / volume,
        h,
        count,
        volume,
    })
}

/// Density of surviving terminals in `B_h(x)`, per unit volume of the window
/// inside the domain.
pub fn estimate_green(ensemble: &KilledEnsemble, x: &Vec3, h: f64) -> Result<GreenEstimate, SdeError> {
    let terminals: Vec<Vec3> = ensemble.survivors().collect();
    estimate_green_from(&ensemble.domain, &terminals, ensemble.n_paths(), x, h)
}

/// Surviving fraction and its binomial standard error.
pub fn survival_probability(ensemble: &KilledEnsemble) -> (f64, f64) {
    let n = ensemble.n_paths() as f64;
    let p = ensemble.survivor_count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

//! Numerical checks of the Green's function estimates: weighted upper bounds,
//! decay exponents near vertices, edges and faces, the structural identities
//! of the killed diffusion, and long-time decay.

mod bound;
mod decay;
mod features;
mod identities;
mod longtime;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::ExponentError;
use crate::geometry::{Domain, Vec3};
use crate::oracles::OracleError;
use crate::sde_mc::{kill_times, simulate_batch, window_volume, CoefficientSchedule, GreenEstimate, SdeError};
use crate::weights::WeightError;

pub use bound::{check_upper_bound, BoundCell, BoundGrid, BoundReport, FeatureStability};
pub use decay::{fit_decay, DecayFit, DecayPoint};
pub use features::{approach_point, approach_scale, Feature};
pub use identities::{
    check_chapman_kolmogorov, check_chapman_kolmogorov_mc, check_domain_monotonicity, check_gaussian_domination,
    check_time_reversal, check_time_reversal_with, domination_bound, oracle_monotonicity, ChapmanKolmogorovReport,
    DominationCheck, McComparison, MonotonicityReport,
};
pub use longtime::{check_longtime_decay, inscribed_cube, LongtimeMode, LongtimeReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("inadmissible weight parameters: {0}")]
    InadmissibleLambda(String),
    #[error("insufficient paths: {0}")]
    InsufficientPaths(String),
    #[error("signal below noise: {0}")]
    SignalBelowNoise(String),
    #[error("quadrature not converged: relative change {0:e} between refinements")]
    QuadratureNotConverged(f64),
    #[error("horizon too short: {0}")]
    HorizonTooShort(String),
    #[error("feature {0} does not exist on this domain")]
    BadFeature(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Monte Carlo budget shared by the checks. Estimates add batches of `paths`
/// until `min_count` hits are reached or `max_paths` have been used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub paths: usize,
    pub max_paths: usize,
    pub min_count: usize,
    pub dt: f64,
    pub seed: u64,
    pub bridge: bool,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            paths: 20_000,
            max_paths: 2_000_000,
            min_count: 200,
            dt: 0.01,
            seed: 1,
            bridge: true,
        }
    }
}

/// Disjoint path-index ranges for independent estimates within one check.
fn stream(cell: u64) -> u64 {
    cell << 40
}

/// Step no larger than `dt` and no larger than the horizon.
fn step(mc: &McParams, span: f64) -> f64 {
    if span > 0.0 {
        mc.dt.min(span)
    } else {
        mc.dt
    }
}

/// Survivors out of paths started at `(s, y)`, adding batches until
/// `min_count` survivors or `max_paths` paths. Returns `(survivors, paths)`.
#[allow(clippy::too_many_arguments)]
fn adaptive_survival(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    s: f64,
    y: &Vec3,
    t: f64,
    mc: &McParams,
    cell: u64,
) -> Result<(usize, usize), VerifyError> {
    let base = stream(cell);
    let mut used = 0usize;
    let mut alive = 0usize;
    while used < mc.max_paths && (used == 0 || alive < mc.min_count) {
        let batch = mc.paths.min(mc.max_paths - used) as u64;
        let range = base + used as u64..base + used as u64 + batch;
        kill_times(domain, schedule, s, y, t, step(mc, t - s), range, mc.seed, mc.bridge, |times| {
            alive += times.iter().filter(|k| k.is_infinite()).count();
        })?;
        used += batch as usize;
    }
    Ok((alive, used))
}

/// Window estimates at every target from one adaptive run started at
/// `(s, start)`; batches continue until every window holds `min_count`
/// terminals or `max_paths` is reached.
#[allow(clippy::too_many_arguments)]
fn adaptive_windows(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    s: f64,
    start: &Vec3,
    t: f64,
    targets: &[(Vec3, f64)],
    mc: &McParams,
    cell: u64,
) -> Result<(Vec<GreenEstimate>, usize), VerifyError> {
    let volumes: Vec<f64> = targets.iter().map(|(x, h)| window_volume(domain, x, *h)).collect();
    if volumes.iter().any(|v| *v <= 0.0) {
        return Err(SdeError::EmptyWindowVolume.into());
    }
    let base = stream(cell);
    let mut counts = vec![0usize; targets.len()];
    let mut used = 0usize;
    while used < mc.max_paths && (used == 0 || counts.iter().any(|c| *c < mc.min_count)) {
        let batch = mc.paths.min(mc.max_paths - used) as u64;
        let range: Range<u64> = base + used as u64..base + used as u64 + batch;
        let recs = simulate_batch(domain, schedule, s, start, t, step(mc, t - s), range, mc.seed, mc.bridge)?;
        for r in recs.iter().filter(|r| r.survived) {
            let p = Vec3::from(r.position);
            for (k, (x, h)) in targets.iter().enumerate() {
                if (p - x).norm_squared() < h * h {
                    counts[k] += 1;
                }
            }
        }
        used += batch as usize;
    }
    let estimates = targets
        .iter()
        .zip(&volumes)
        .zip(&counts)
        .map(|(((_, h), vol), &count)| {
            let p = count as f64 / used as f64;
            GreenEstimate {
                value: p / vol,
                stderr: (p * (1.0 - p) / used as f64).sqrt() / vol,
                h: *h,
                count,
                volume: *vol,
            }
        })
        .collect();
    Ok((estimates, used))
}

/// Weighted least squares line `y = a + b x`; returns `(b, se_b, a)`. The
/// slope error is inflated by the reduced chi-square when it exceeds one.
fn weighted_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let dof = x.len().saturating_sub(2);
    let chi2: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (y - a - b * x).powi(2)).sum();
    let scale = if dof > 0 { (chi2 / dof as f64).max(1.0) } else { 1.0 };
    (b, (scale / sxx).sqrt(), a)
}

/// Ordinary least squares with the slope error estimated from the residuals,
/// for noise-free samples. Returns `(slope, slope_stderr, intercept)`.
fn residual_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let w = vec![1.0; x.len()];
    let (b, _, a) = weighted_fit(x, y, &w);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    let rss: f64 = x.iter().zip(y).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let dof = x.len().saturating_sub(2).max(1) as f64;
    (b, (rss / dof / sxx).sqrt(), a)
}

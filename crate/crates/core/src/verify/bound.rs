use serde::{Deserialize, Serialize};

use super::{adaptive_windows, approach_point, approach_scale, Feature, McParams, VerifyError};
use crate::exponents::{admissible, exponent_report, Admissibility};
use crate::geometry::{Domain, Vec3};
use crate::sde_mc::{default_window, CoefficientSchedule};
use crate::spectral::EigenOptions;
use crate::weights::{gaussian_factor, WeightEvaluator, WeightParams};

/// Sample points for the bound check. For each feature and level `k`, the
/// source is `foot + d0 2^{-k} dir` with `d0` the smaller of
/// `start_distance` and the feature's [`approach_scale`]; the Green's
/// function is estimated from it to every target at every time lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundGrid {
    pub times: Vec<f64>,
    pub targets: Vec<[f64; 3]>,
    pub features: Vec<Feature>,
    pub start_distance: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCell {
    pub feature: Feature,
    pub level: usize,
    pub distance: f64,
    pub tau: f64,
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub green: f64,
    pub green_stderr: f64,
    pub count: usize,
    pub paths: usize,
    pub weight_x: f64,
    pub weight_y: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureStability {
    pub feature: Feature,
    /// Largest ratio over all cells up to each level.
    pub sup_by_level: Vec<f64>,
    /// `sup(levels ≤ L) / sup(levels ≤ L - 2)`.
    pub growth: f64,
    pub divergent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub domain: &'static str,
    pub lambda_plus: WeightParams,
    pub lambda_minus: WeightParams,
    /// Admissibility of both parameter sets against the exponent ranges
    /// (heat values when `a = c I`, lower bounds otherwise); absent when the
    /// domain has no vertices or edges.
    pub admissibility: Option<(Admissibility, Admissibility)>,
    /// `σ` from the envelope fit, before flooring.
    pub sigma_fit: Option<f64>,
    pub sigma: f64,
    pub grid: BoundGrid,
    pub sup_ratio: f64,
    pub cells: Vec<BoundCell>,
    pub features: Vec<FeatureStability>,
    pub divergent: bool,
    pub total_paths: usize,
    pub growth_threshold: f64,
}

/// Stability threshold: growth of the running supremum over two dyadic
/// refinements toward a feature.
pub const GROWTH_THRESHOLD: f64 = 1.5;

/// Bin maxima of `log(G / (I(x) I(y))) + 1.5 log τ` against `u = |x - y|²/τ`,
/// fitted by a line; returns minus the slope (`None` without two bins).
fn fit_sigma(cells: &[BoundCell]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| c.count > 0 && c.weight_x * c.weight_y > 0.0)
        .map(|c| {
            let d = Vec3::from(c.x) - Vec3::from(c.y);
            let w = c.weight_x * c.weight_y;
            (d.norm_squared() / c.tau, (c.green / w).ln() + 1.5 * c.tau.ln())
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-9 {
        return None;
    }
    let bins = 6;
    let mut best = vec![(f64::NAN, f64::NEG_INFINITY); bins];
    for (u, v) in pts {
        let b = (((u - lo) / (hi - lo)) * bins as f64).min(bins as f64 - 1.0) as usize;
        if v > best[b].1 {
            best[b] = (u, v);
        }
    }
    let pts: Vec<(f64, f64)> = best.into_iter().filter(|p| p.1.is_finite()).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mu = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mu).powi(2)).sum();
    Some(-sxy / sxx)
}

/// Smallest `σ` used in the ratios; the fit can come out flat or rising when
/// the targets span a narrow range of `|x - y|²/τ`.
pub const SIGMA_FLOOR: f64 = 1e-3;

fn admissibility_of(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    plus: &WeightParams,
    minus: &WeightParams,
) -> Result<Option<(Admissibility, Admissibility)>, VerifyError> {
    if !matches!(domain, Domain::Cone(_) | Domain::Polyhedron(_)) {
        return Ok(None);
    }
    let heat = schedule.isotropic_constant().is_some();
    let report = exponent_report(domain, schedule.nu1(), schedule.nu2(), heat, &EigenOptions::default())?;
    Ok(Some((admissible(plus, &report, heat)?, admissible(minus, &report, heat)?)))
}

/// Ratio of Monte Carlo Green's function estimates to
/// `I(x, √τ; Λ⁺) I(y, √τ; Λ⁻) τ^{-3/2} e^{-σ|x-y|²/τ}` on a grid that
/// refines dyadically toward each feature. `G(τ, 0, x, y)` is estimated by the
/// adjoint diffusion (reversed schedule) started at `x` at time `-τ`, with
/// windows at the targets `y`.
pub fn check_upper_bound(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    lambda_plus: &WeightParams,
    lambda_minus: &WeightParams,
    grid: &BoundGrid,
    mc: &McParams,
) -> Result<BoundReport, VerifyError> {
    for p in [lambda_plus, lambda_minus] {
        p.validate(domain).map_err(|e| VerifyError::InadmissibleLambda(e.to_string()))?;
    }
    if grid.levels < 2 {
        return Err(VerifyError::Unsupported("the bound check needs at least two refinement levels".into()));
    }
    let admissibility = admissibility_of(domain, schedule, lambda_plus, lambda_minus)?;
    let wx = WeightEvaluator::new(domain, lambda_plus)?;
    let wy = WeightEvaluator::new(domain, lambda_minus)?;
    let reversed = schedule.reversed();
    let targets: Vec<Vec3> = grid.targets.iter().map(|y| Vec3::from(*y)).collect();
    let mut cells = Vec::new();
    let mut total_paths = 0;
    let mut cell_id = 0u64;
    for &feature in &grid.features {
        let (foot, dir) = approach_point(domain, feature)?;
        let start = grid.start_distance.min(approach_scale(domain, feature, &foot));
        for level in 0..=grid.levels {
            let distance = start * 0.5f64.powi(level as i32);
            let x = foot + distance * dir;
            if !domain.contains(&x) {
                return Err(VerifyError::BadFeature(format!("{feature}: approach point {x:?} is outside")));
            }
            for &tau in &grid.times {
                let windows: Vec<(Vec3, f64)> =
                    targets.iter().map(|y| (*y, default_window(domain, schedule, 0.0, tau, y))).collect();
                let (est, paths) = adaptive_windows(domain, &reversed, -tau, &x, 0.0, &windows, mc, cell_id)?;
                cell_id += 1;
                total_paths += paths;
                let r = tau.sqrt();
                for (y, e) in targets.iter().zip(&est) {
                    cells.push(BoundCell {
                        feature,
                        level,
                        distance,
                        tau,
                        x: [x.x, x.y, x.z],
                        y: [y.x, y.y, y.z],
                        green: e.value,
                        green_stderr: e.stderr,
                        count: e.count,
                        paths,
                        weight_x: wx.eval(&x, r),
                        weight_y: wy.eval(y, r),
                        ratio: 0.0,
                        ratio_stderr: 0.0,
                    });
                }
            }
        }
    }
    let sigma_fit = fit_sigma(&cells);
    let sigma = sigma_fit.unwrap_or(SIGMA_FLOOR).max(SIGMA_FLOOR);
    for c in &mut cells {
        let d = Vec3::from(c.x) - Vec3::from(c.y);
        let denom = c.weight_x * c.weight_y * gaussian_factor(c.tau, &d, sigma)?;
        c.ratio = c.green / denom;
        c.ratio_stderr = c.green_stderr / denom;
    }
    let mut features = Vec::new();
    for &feature in &grid.features {
        let mine: Vec<&BoundCell> = cells.iter().filter(|c| c.feature == feature && c.count > 0).collect();
        let deepest = cells
            .iter()
            .filter(|c| c.feature == feature && c.level == grid.levels)
            .map(|c| c.count)
            .max()
            .unwrap_or(0);
        if deepest == 0 {
            return Err(VerifyError::InsufficientPaths(format!(
                "no terminal reached any window from the deepest {feature} level; raise max_paths"
            )));
        }
        let sup_by_level: Vec<f64> = (0..=grid.levels)
            .map(|l| mine.iter().filter(|c| c.level <= l).map(|c| c.ratio).fold(0.0, f64::max))
            .collect();
        let l = grid.levels;
        let growth = sup_by_level[l] / sup_by_level[l - 2];
        features.push(FeatureStability {
            feature,
            sup_by_level,
            growth,
            divergent: !(growth < GROWTH_THRESHOLD),
        });
    }
    let sup_ratio = cells.iter().map(|c| c.ratio).fold(0.0, f64::max);
    Ok(BoundReport {
        domain: domain.name(),
        lambda_plus: lambda_plus.clone(),
        lambda_minus: lambda_minus.clone(),
        admissibility,
        sigma_fit,
        sigma,
        grid: grid.clone(),
        sup_ratio,
        divergent: features.iter().any(|f| f.divergent),
        features,
        cells,
        total_paths,
        growth_threshold: GROWTH_THRESHOLD,
    })
}

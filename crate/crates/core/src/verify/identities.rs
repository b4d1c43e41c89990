use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::{adaptive_windows, step, stream, McParams, VerifyError};
use crate::geometry::{Domain, Vec3};
use crate::oracles::OracleKernel;
use crate::quadrature::composite;
use crate::sde_mc::{simulate_batch, CoefficientSchedule, GreenEstimate};

/// Gauss–Legendre order per panel for the composition integrals.
const QUAD_ORDER: usize = 10;

/// Nodes and weights per axis.
type TensorRule = [(Vec<f64>, Vec<f64>); 3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChapmanKolmogorovReport {
    pub direct: f64,
    pub composed: f64,
    pub rel_error: f64,
    /// Relative change of the composed value when the panels are doubled.
    pub quadrature_change: f64,
    pub panels: usize,
}

/// Tensor Gauss–Legendre rule over the effective support of the composition:
/// the kernel's domain cut to within 12 diffusion lengths of `x` and `y`.
fn support_rule(kernel: &OracleKernel, width: f64, x: &Vec3, y: &Vec3, panels: usize) -> Result<TensorRule, VerifyError> {
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for i in 0..3 {
        lo[i] = x[i].min(y[i]) - width;
        hi[i] = x[i].max(y[i]) + width;
    }
    match kernel {
        OracleKernel::Free => {}
        OracleKernel::HalfSpace => lo[2] = lo[2].max(0.0),
        OracleKernel::OrthantWedge { m: 2 } => {
            lo[0] = lo[0].max(0.0);
            lo[1] = lo[1].max(0.0);
        }
        OracleKernel::Box { lengths } => {
            for i in 0..3 {
                lo[i] = lo[i].max(0.0);
                hi[i] = hi[i].min(lengths[i]);
            }
        }
        other => {
            return Err(VerifyError::Unsupported(format!(
                "composition quadrature needs a box-shaped support, not {other:?}"
            )))
        }
    }
    Ok(std::array::from_fn(|i| composite(lo[i], hi[i], panels, QUAD_ORDER)))
}

#[allow(clippy::too_many_arguments)]
fn compose(
    kernel: &OracleKernel,
    c: f64,
    t: f64,
    r: f64,
    s: f64,
    x: &Vec3,
    y: &Vec3,
    panels: usize,
    tol: f64,
) -> Result<f64, VerifyError> {
    let width = 12.0 * (c * (t - s)).sqrt();
    let rule = support_rule(kernel, width, x, y, panels)?;
    let mut sum = 0.0;
    for (z0, w0) in rule[0].0.iter().zip(&rule[0].1) {
        for (z1, w1) in rule[1].0.iter().zip(&rule[1].1) {
            for (z2, w2) in rule[2].0.iter().zip(&rule[2].1) {
                let z = Vec3::new(*z0, *z1, *z2);
                let a = kernel.eval(c, t, r, x, &z, tol)?;
                if a == 0.0 {
                    continue;
                }
                sum += w0 * w1 * w2 * a * kernel.eval(c, r, s, &z, y, tol)?;
            }
        }
    }
    Ok(sum)
}

/// `∫ K(t, r, x, z) K(r, s, z, y) dz` against `K(t, s, x, y)` for an oracle
/// kernel with `a = c I`. The quadrature is repeated with twice the panels;
/// a relative change above `1e-9` is reported as non-convergence.
#[allow(clippy::too_many_arguments)]
pub fn check_chapman_kolmogorov(
    kernel: &OracleKernel,
    c: f64,
    t: f64,
    r: f64,
    s: f64,
    x: &Vec3,
    y: &Vec3,
    panels: usize,
) -> Result<ChapmanKolmogorovReport, VerifyError> {
    if !(s < r && r < t) {
        return Err(VerifyError::Unsupported("need s < r < t".into()));
    }
    let tol = 1e-15;
    let direct = kernel.eval(c, t, s, x, y, tol)?;
    let coarse = compose(kernel, c, t, r, s, x, y, panels, tol)?;
    let fine = compose(kernel, c, t, r, s, x, y, 2 * panels, tol)?;
    let change = ((fine - coarse) / fine).abs();
    if change > 1e-9 {
        return Err(VerifyError::QuadratureNotConverged(change));
    }
    Ok(ChapmanKolmogorovReport {
        direct,
        composed: fine,
        rel_error: ((fine - direct) / direct).abs(),
        quadrature_change: change,
        panels: 2 * panels,
    })
}

/// Two independent Monte Carlo estimates of the same quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McComparison {
    pub first: f64,
    pub first_stderr: f64,
    pub second: f64,
    pub second_stderr: f64,
    pub z: f64,
    pub paths: usize,
}

impl McComparison {
    fn new(first: (f64, f64), second: (f64, f64), paths: usize) -> Self {
        let se = first.1.hypot(second.1);
        McComparison {
            first: first.0,
            first_stderr: first.1,
            second: second.0,
            second_stderr: second.1,
            z: if se > 0.0 { (first.0 - second.0) / se } else { 0.0 },
            paths,
        }
    }
}

/// Number of independent groups in the pair estimator.
const PAIR_GROUPS: usize = 20;

/// Pairs `(z, w)` with `|z - w| < h`, counted through a grid of cell size `h`.
fn close_pairs(a: &[Vec3], b: &[Vec3], h: f64) -> usize {
    let cell = |p: &Vec3| ((p.x / h).floor() as i64, (p.y / h).floor() as i64, (p.z / h).floor() as i64);
    let mut grid: HashMap<(i64, i64, i64), Vec<Vec3>> = HashMap::new();
    for p in b {
        grid.entry(cell(p)).or_default().push(*p);
    }
    let h2 = h * h;
    let mut count = 0;
    for p in a {
        let (i, j, k) = cell(p);
        for di in -1..=1 {
            for dj in -1..=1 {
                for dk in -1..=1 {
                    if let Some(v) = grid.get(&(i + di, j + dj, k + dk)) {
                        count += v.iter().filter(|q| (*q - p).norm_squared() < h2).count();
                    }
                }
            }
        }
    }
    count
}

/// Monte Carlo Chapman–Kolmogorov check. The direct value `G(t, s, x, y)` is a
/// window estimate at `x` from paths started at `(s, y)`. The composition
/// `∫ G(t, r, x, z) G(r, s, z, y) dz` pairs terminals of forward paths from
/// `(s, y)` at time `r` with terminals of adjoint paths from `(-t, x)` at time
/// `-r`: pairs closer than `h` divided by `n² |B_h|` estimate it. Paths are
/// split into independent groups for the standard error.
#[allow(clippy::too_many_arguments)]
pub fn check_chapman_kolmogorov_mc(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    t: f64,
    r: f64,
    s: f64,
    x: &Vec3,
    y: &Vec3,
    h: f64,
    pair_paths: usize,
    mc: &McParams,
) -> Result<McComparison, VerifyError> {
    if !(s < r && r < t) {
        return Err(VerifyError::Unsupported("need s < r < t".into()));
    }
    let direct_mc = McParams {
        min_count: usize::MAX,
        ..*mc
    };
    let (direct, direct_paths) = adaptive_windows(domain, schedule, s, y, t, &[(*x, h)], &direct_mc, 0)?;
    let direct = direct[0];
    let n = pair_paths as u64;
    let fwd = simulate_batch(domain, schedule, s, y, r, step(mc, r - s), stream(1)..stream(1) + n, mc.seed, mc.bridge)?;
    let reversed = schedule.reversed();
    let adj = simulate_batch(domain, &reversed, -t, x, -r, step(mc, t - r), stream(2)..stream(2) + n, mc.seed, mc.bridge)?;
    let group_size = pair_paths / PAIR_GROUPS;
    if group_size == 0 {
        return Err(VerifyError::InsufficientPaths(format!("need at least {PAIR_GROUPS} pair paths")));
    }
    let ball = 4.0 / 3.0 * PI * h.powi(3);
    let survivors = |recs: &[crate::sde_mc::PathRecord]| -> Vec<Vec3> {
        recs.iter().filter(|r| r.survived).map(|r| Vec3::from(r.position)).collect()
    };
    let mut estimates = Vec::with_capacity(PAIR_GROUPS);
    for g in 0..PAIR_GROUPS {
        let range = g * group_size..(g + 1) * group_size;
        let a = survivors(&fwd[range.clone()]);
        let b = survivors(&adj[range]);
        let pairs = close_pairs(&a, &b, h);
        estimates.push(pairs as f64 / ((group_size * group_size) as f64 * ball));
    }
    let m = PAIR_GROUPS as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(McComparison::new(
        (direct.value, direct.stderr),
        (mean, (var / m).sqrt()),
        direct_paths + 2 * pair_paths,
    ))
}

/// Forward estimate `G(t, s, x, y)` (paths from `(s, y)`, window at `x`)
/// against the adjoint estimate `Ĝ(-s, -t, y, x)` (paths under
/// `adjoint_schedule` from `(-t, x)`, window at `y`).
#[allow(clippy::too_many_arguments)]
pub fn check_time_reversal_with(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    adjoint_schedule: &CoefficientSchedule,
    s: f64,
    y: &Vec3,
    t: f64,
    x: &Vec3,
    h: f64,
    mc: &McParams,
) -> Result<McComparison, VerifyError> {
    let fixed = McParams {
        min_count: usize::MAX,
        ..*mc
    };
    let (f, nf) = adaptive_windows(domain, schedule, s, y, t, &[(*x, h)], &fixed, 0)?;
    let (b, nb) = adaptive_windows(domain, adjoint_schedule, -t, x, -s, &[(*y, h)], &fixed, 1)?;
    if f[0].count == 0 || b[0].count == 0 {
        return Err(VerifyError::InsufficientPaths("a window received no terminals".into()));
    }
    Ok(McComparison::new((f[0].value, f[0].stderr), (b[0].value, b[0].stderr), nf + nb))
}

/// Time-reversal identity with the correct adjoint schedule `a(-t)`.
#[allow(clippy::too_many_arguments)]
pub fn check_time_reversal(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    s: f64,
    y: &Vec3,
    t: f64,
    x: &Vec3,
    h: f64,
    mc: &McParams,
) -> Result<McComparison, VerifyError> {
    check_time_reversal_with(domain, schedule, &schedule.reversed(), s, y, t, x, h, mc)
}

/// `(4π ν₁ τ)^{-3/2} exp(-|d|²/(4 ν₂ τ))`, which dominates the free kernel of
/// every schedule with eigenvalues in `[ν₁, ν₂]`.
pub fn domination_bound(schedule: &CoefficientSchedule, tau: f64, d: f64) -> f64 {
    (4.0 * PI * schedule.nu1() * tau).powf(-1.5) * (-d * d / (4.0 * schedule.nu2() * tau)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `(estimate - bound) / stderr`; violations have `z > 3`.
    pub z: f64,
    pub violated: bool,
}

/// Compares a window estimate of `G(t, s, x, y)` with the dominating Gaussian,
/// evaluated at the window point closest to `y` so the comparison is valid
/// for the window average.
pub fn check_gaussian_domination(
    schedule: &CoefficientSchedule,
    tau: f64,
    x: &Vec3,
    y: &Vec3,
    estimate: &GreenEstimate,
) -> DominationCheck {
    let d = ((x - y).norm() - estimate.h).max(0.0);
    let bound = domination_bound(schedule, tau, d);
    let z = if estimate.stderr > 0.0 {
        (estimate.value - bound) / estimate.stderr
    } else if estimate.value > bound {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    DominationCheck {
        estimate: estimate.value,
        stderr: estimate.stderr,
        bound,
        z,
        violated: z > 3.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Indices `i` with `G_i > G_{i+1}` beyond three combined standard errors.
    pub violations: Vec<usize>,
}

/// Window estimates of `G(t, s, x, y)` on nested domains, smallest first.
#[allow(clippy::too_many_arguments)]
pub fn check_domain_monotonicity(
    domains: &[Domain],
    schedule: &CoefficientSchedule,
    s: f64,
    y: &Vec3,
    t: f64,
    x: &Vec3,
    h: f64,
    mc: &McParams,
) -> Result<MonotonicityReport, VerifyError> {
    let fixed = McParams {
        min_count: usize::MAX,
        ..*mc
    };
    let mut values = Vec::new();
    let mut stderrs = Vec::new();
    for (i, d) in domains.iter().enumerate() {
        let (e, _) = adaptive_windows(d, schedule, s, y, t, &[(*x, h)], &fixed, i as u64)?;
        values.push(e[0].value);
        stderrs.push(e[0].stderr);
    }
    let violations = (1..values.len())
        .filter(|&i| values[i - 1] - values[i] > 3.0 * stderrs[i - 1].hypot(stderrs[i]))
        .map(|i| i - 1)
        .collect();
    Ok(MonotonicityReport {
        values,
        stderrs,
        violations,
    })
}

/// Box oracle values on nested boxes `[0, L]³`; violations are indices where
/// the value fails to increase strictly.
pub fn oracle_monotonicity(
    sides: &[f64],
    c: f64,
    t: f64,
    s: f64,
    x: &Vec3,
    y: &Vec3,
) -> Result<MonotonicityReport, VerifyError> {
    let values = sides
        .iter()
        .map(|&l| OracleKernel::Box { lengths: [l; 3] }.eval(c, t, s, x, y, 1e-15))
        .collect::<Result<Vec<f64>, _>>()?;
    let violations = (1..values.len()).filter(|&i| values[i] <= values[i - 1]).map(|i| i - 1).collect();
    Ok(MonotonicityReport {
        stderrs: vec![0.0; values.len()],
        values,
        violations,
    })
}

//! Exact and series heat kernels with Dirichlet conditions: free space,
//! half-space, image wedges of angle π/m, Bessel-series wedges and boxes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{HalfSpace, Vec3, WedgeSpec};
use crate::sde_mc::CoefficientSchedule;
use crate::special::bessel_i_scaled;

/// Cap on series terms before giving up.
const MAX_TERMS: usize = 20_000;

/// `τ / L²` at which the interval kernel switches from images to sines.
pub const SERIES_SWITCH: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("need t > s, got t - s = {0}")]
    NonpositiveInterval(f64),
    #[error("point {0:?} is outside the domain")]
    PointOutsideDomain([f64; 3]),
    #[error("wedge angle {0} is not pi/m for an integer m")]
    UnsupportedAngle(f64),
    #[error("series did not reach tolerance {tol:e} within {terms} terms")]
    SeriesNotConverged { terms: usize, tol: f64 },
    #[error("{0} must be positive")]
    Nonpositive(&'static str),
    #[error("oracle needs a constant isotropic schedule a = c I")]
    NotIsotropic,
}

fn check_tau(c: f64, t: f64, s: f64) -> Result<f64, OracleError> {
    if !(c > 0.0) {
        return Err(OracleError::Nonpositive("diffusivity"));
    }
    if !(t > s) {
        return Err(OracleError::NonpositiveInterval(t - s));
    }
    Ok(c * (t - s))
}

fn arr(x: &Vec3) -> [f64; 3] {
    [x.x, x.y, x.z]
}

/// `(4πτ)^{-1/2} e^{-u²/4τ}`.
fn g1(tau: f64, u: f64) -> f64 {
    (-u * u / (4.0 * tau)).exp() / (4.0 * PI * tau).sqrt()
}

/// `(4πτ)^{-3/2} e^{-|d|²/4τ}`.
pub fn heat_kernel(tau: f64, d: &Vec3) -> f64 {
    (-d.norm_squared() / (4.0 * tau)).exp() / (4.0 * PI * tau).powf(1.5)
}

/// Free-space kernel of `∂_t u = Σ a_ij(t) ∂_ij u`: Gaussian with covariance
/// `Σ = 2 ∫_s^t a(u) du`.
pub fn gaussian_kernel(schedule: &CoefficientSchedule, t: f64, s: f64, x: &Vec3, y: &Vec3) -> Result<f64, OracleError> {
    if !(t > s) {
        return Err(OracleError::NonpositiveInterval(t - s));
    }
    let sigma = 2.0 * schedule.integral(s, t);
    let chol = sigma.cholesky().ok_or(OracleError::Nonpositive("covariance"))?;
    let d = x - y;
    let q = d.dot(&chol.solve(&d));
    let det = chol.l().diagonal().product().powi(2);
    Ok((2.0 * PI).powf(-1.5) / det.sqrt() * (-0.5 * q).exp())
}

/// Half-space kernel for `a = c I` by reflection.
pub fn halfspace_kernel(h: &HalfSpace, c: f64, t: f64, s: f64, x: &Vec3, y: &Vec3) -> Result<f64, OracleError> {
    let tau = check_tau(c, t, s)?;
    for p in [x, y] {
        if h.signed_distance(p) < 0.0 {
            return Err(OracleError::PointOutsideDomain(arr(p)));
        }
    }
    let v = heat_kernel(tau, &(x - y)) - heat_kernel(tau, &(x - h.reflect(y)));
    Ok(v.max(0.0))
}

/// Kernel of the standard wedge `{0 < θ < π/m}`, `m >= 2`, about the z-axis for
/// `a = c I`, as the alternating sum over the `2m` dihedral images.
pub fn orthant_wedge_kernel(m: usize, c: f64, t: f64, s: f64, x: &Vec3, y: &Vec3) -> Result<f64, OracleError> {
    if m < 2 {
        // m = 1 is a half-space (straight edge); use `halfspace_kernel`.
        return Err(OracleError::UnsupportedAngle(PI / m as f64));
    }
    let wedge = WedgeSpec::standard(PI / m as f64).expect("pi/m is a valid wedge angle");
    image_wedge_kernel(&wedge, c, t, s, x, y)
}

/// Image-method kernel for a wedge whose angle is `π/m`.
pub fn image_wedge_kernel(wedge: &WedgeSpec, c: f64, t: f64, s: f64, x: &Vec3, y: &Vec3) -> Result<f64, OracleError> {
    let tau = check_tau(c, t, s)?;
    let kappa = wedge.kappa();
    let m = (PI / kappa).round();
    if m < 1.0 || (PI / m - kappa).abs() > 1e-12 {
        return Err(OracleError::UnsupportedAngle(kappa));
    }
    let m = m as usize;
    let (rx, tx, zx) = cyl_checked(wedge, x)?;
    let (ry, ty, zy) = cyl_checked(wedge, y)?;
    let planar = |rho: f64, theta: f64| (-(rx * rx + rho * rho - 2.0 * rx * rho * (tx - theta).cos()) / (4.0 * tau)).exp();
    let mut sum = 0.0;
    for k in 0..m {
        let rot = 2.0 * kappa * k as f64;
        sum += planar(ry, ty + rot) - planar(ry, -ty + rot);
    }
    let v = sum / (4.0 * PI * tau) * g1(tau, zx - zy);
    Ok(v.max(0.0))
}

fn cyl_checked(wedge: &WedgeSpec, x: &Vec3) -> Result<(f64, f64, f64), OracleError> {
    let (r, th, z) = wedge.cylindrical(x);
    // Points on the faces are allowed; the kernel vanishes there.
    if th > wedge.kappa() + 1e-12 && th < 2.0 * PI - 1e-12 {
        return Err(OracleError::PointOutsideDomain(arr(x)));
    }
    let th = if th > wedge.kappa() { 0.0 } else { th };
    Ok((r, th, z))
}

/// Wedge kernel of any angle `κ ∈ (0, 2π)` for `a = c I`:
/// `(2/κ) Σ sin(νθ) sin(νθ') (2τ)^{-1} e^{-(ρ²+ρ'²)/4τ} I_ν(ρρ'/2τ)`,
/// `ν = nπ/κ`, times the free kernel along the edge. Stops once a
/// geometric bound on the remaining terms is below `tol`.
pub fn general_wedge_kernel(
    wedge: &WedgeSpec,
    c: f64,
    t: f64,
    s: f64,
    x: &Vec3,
    y: &Vec3,
    tol: f64,
) -> Result<f64, OracleError> {
    let tau = check_tau(c, t, s)?;
    let kappa = wedge.kappa();
    let (rx, tx, zx) = cyl_checked(wedge, x)?;
    let (ry, ty, zy) = cyl_checked(wedge, y)?;
    let edge = g1(tau, zx - zy);
    if rx == 0.0 || ry == 0.0 {
        return Ok(0.0);
    }
    let z = rx * ry / (2.0 * tau);
    // e^{-(ρ²+ρ'²)/4τ} I_ν(z) = e^{-(ρ-ρ')²/4τ} e^{-z} I_ν(z).
    let pref = 2.0 / kappa / (2.0 * tau) * (-(rx - ry).powi(2) / (4.0 * tau)).exp() * edge;
    let tol_bessel = 1e-17;
    let mut sum = 0.0;
    let mut prev_bound = f64::INFINITY;
    for n in 1..=MAX_TERMS {
        let nu = n as f64 * PI / kappa;
        let (i_scaled, _) = bessel_i_scaled(nu, z, tol_bessel).map_err(|_| OracleError::SeriesNotConverged {
            terms: n,
            tol,
        })?;
        let bound = pref * i_scaled;
        sum += bound * (nu * tx).sin() * (nu * ty).sin();
        // Past ν > z the scaled Bessel values decrease at a decreasing ratio,
        // so the tail is at most a geometric series with the current ratio.
        if nu > z && prev_bound.is_finite() {
            let ratio = bound / prev_bound;
            if ratio < 1.0 && bound * ratio / (1.0 - ratio) < tol {
                return Ok(sum.max(0.0));
            }
        }
        if bound == 0.0 && nu > z {
            return Ok(sum.max(0.0));
        }
        prev_bound = bound;
    }
    Err(OracleError::SeriesNotConverged { terms: MAX_TERMS, tol })
}

/// Dirichlet heat kernel of `∂_t = ∂_xx` on `(0, L)` at time `τ`.
pub fn interval_kernel(l: f64, tau: f64, x: f64, y: f64, tol: f64) -> Result<f64, OracleError> {
    if !(l > 0.0) {
        return Err(OracleError::Nonpositive("side length"));
    }
    if !(tau > 0.0) {
        return Err(OracleError::NonpositiveInterval(tau));
    }
    if tau / (l * l) >= SERIES_SWITCH {
        let a = PI * PI * tau / (l * l);
        let mut sum = 0.0;
        for n in 1..=MAX_TERMS {
            let k = n as f64 * PI / l;
            sum += (k * x).sin() * (k * y).sin() * (-a * (n * n) as f64).exp();
            // Tail after n: Σ_{m>n} e^{-a m²} ≤ e^{-a (n+1)²} / (1 - e^{-a (2n+3)}).
            let np = (n + 1) as f64;
            let tail = (-a * np * np).exp() / (1.0 - (-a * (2.0 * np + 1.0)).exp());
            if 2.0 / l * tail < tol {
                return Ok((2.0 / l * sum).max(0.0));
            }
        }
        Err(OracleError::SeriesNotConverged { terms: MAX_TERMS, tol })
    } else {
        let mut sum = g1(tau, x - y) - g1(tau, x + y);
        for k in 1..=MAX_TERMS {
            let shift = 2.0 * l * k as f64;
            let mut term = 0.0;
            for sh in [shift, -shift] {
                term += g1(tau, x - y + sh) - g1(tau, x + y + sh);
            }
            sum += term;
            // Remaining images sit at least 2L(k + 1) - 2L away.
            let next = 2.0 * l * (k + 1) as f64 - 2.0 * l;
            if 4.0 * g1(tau, next) / (1.0 - (-l * l / tau).exp()) < tol {
                return Ok(sum.max(0.0));
            }
        }
        Err(OracleError::SeriesNotConverged { terms: MAX_TERMS, tol })
    }
}

/// Box `[0, L₁] × [0, L₂] × [0, L₃]` kernel for `a = c I` as a product of
/// interval kernels.
pub fn box_kernel(lengths: [f64; 3], c: f64, t: f64, s: f64, x: &Vec3, y: &Vec3, tol: f64) -> Result<f64, OracleError> {
    let tau = check_tau(c, t, s)?;
    for p in [x, y] {
        if (0..3).any(|i| p[i] < 0.0 || p[i] > lengths[i]) {
            return Err(OracleError::PointOutsideDomain(arr(p)));
        }
    }
    // Each factor is bounded by (4πτ)^{-1/2}; split the tolerance accordingly.
    let scale = (4.0 * PI * tau).powf(-1.0);
    let mut v = 1.0;
    for i in 0..3 {
        v *= interval_kernel(lengths[i], tau, x[i], y[i], tol / (3.0 * scale.max(1.0)))?;
    }
    Ok(v)
}

/// First Dirichlet eigenvalue of the Laplacian on a box, `π² Σ 1/Lᵢ²`.
pub fn cube_eigen_decay(lengths: [f64; 3]) -> Result<f64, OracleError> {
    if lengths.iter().any(|l| !(*l > 0.0)) {
        return Err(OracleError::Nonpositive("side length"));
    }
    Ok(PI * PI * lengths.iter().map(|l| 1.0 / (l * l)).sum::<f64>())
}

/// Which closed-form kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleKernel {
    Free,
    /// `{x₃ > 0}`.
    HalfSpace,
    /// `{0 < θ < π/m}` about the z-axis.
    OrthantWedge { m: usize },
    /// `{0 < θ < κ}` about the z-axis.
    GeneralWedge { kappa: f64 },
    /// `[0, L₁] × [0, L₂] × [0, L₃]`.
    Box { lengths: [f64; 3] },
}

impl OracleKernel {
    /// Kernel value at `(t, x; s, y)` for `a = c I`.
    pub fn eval(&self, c: f64, t: f64, s: f64, x: &Vec3, y: &Vec3, tol: f64) -> Result<f64, OracleError> {
        match *self {
            OracleKernel::Free => Ok(heat_kernel(check_tau(c, t, s)?, &(x - y))),
            OracleKernel::HalfSpace => halfspace_kernel(&HalfSpace::upper(), c, t, s, x, y),
            OracleKernel::OrthantWedge { m } => orthant_wedge_kernel(m, c, t, s, x, y),
            OracleKernel::GeneralWedge { kappa } => {
                let w = WedgeSpec::standard(kappa).map_err(|_| OracleError::UnsupportedAngle(kappa))?;
                general_wedge_kernel(&w, c, t, s, x, y, tol)
            }
            OracleKernel::Box { lengths } => box_kernel(lengths, c, t, s, x, y, tol),
        }
    }

    /// Whether `x` lies in the closed domain of the kernel.
    pub fn contains_closed(&self, x: &Vec3) -> bool {
        match *self {
            OracleKernel::Free => true,
            OracleKernel::HalfSpace => x.z >= 0.0,
            OracleKernel::OrthantWedge { m } => {
                let th = x.y.atan2(x.x);
                th >= 0.0 && th <= PI / m as f64 + 1e-15
            }
            OracleKernel::GeneralWedge { kappa } => {
                let mut th = x.y.atan2(x.x);
                if th < 0.0 {
                    th += 2.0 * PI;
                }
                th <= kappa + 1e-15
            }
            OracleKernel::Box { lengths } => (0..3).all(|i| x[i] >= 0.0 && x[i] <= lengths[i]),
        }
    }
}

/// `c` for a schedule `a = c I`, as the oracles require.
pub fn isotropic_diffusivity(schedule: &CoefficientSchedule) -> Result<f64, OracleError> {
    schedule.isotropic_constant().ok_or(OracleError::NotIsotropic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Mat3;
    use crate::quadrature::composite;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_values() {
        let h = CoefficientSchedule::heat();
        let o = Vec3::zeros();
        assert_relative_eq!(gaussian_kernel(&h, 1.0, 0.0, &o, &o).unwrap(), (4.0 * PI).powf(-1.5), max_relative = 1e-14);
        let x = Vec3::new(0.3, -0.4, 1.2);
        assert_relative_eq!(gaussian_kernel(&h, 2.0, 0.5, &x, &o).unwrap(), heat_kernel(1.5, &x), max_relative = 1e-14);
        // Two pieces: Σ = 2 (1 * 0.5 + 3 * 0.25) I = 2.5 I, i.e. τ = 1.25.
        let two = CoefficientSchedule::two_piece(0.0, 1.0, 3.0).unwrap();
        assert_relative_eq!(
            gaussian_kernel(&two, 0.25, -0.5, &x, &o).unwrap(),
            heat_kernel(1.25, &x),
            max_relative = 1e-14
        );
        let aniso = CoefficientSchedule::constant(Mat3::from_diagonal(&Vec3::new(1.0, 2.0, 4.0))).unwrap();
        let want = g1(1.0, x.x) * g1(2.0, x.y) * g1(4.0, x.z);
        assert_relative_eq!(gaussian_kernel(&aniso, 1.0, 0.0, &x, &o).unwrap(), want, max_relative = 1e-13);
        assert!(gaussian_kernel(&h, 0.0, 0.0, &x, &o).is_err());
    }

    #[test]
    fn gaussian_semigroup_by_quadrature() {
        let sch = CoefficientSchedule::two_piece(0.5, 1.0, 2.0).unwrap();
        let (s, r, t) = (0.0, 0.6, 1.0);
        let x = Vec3::new(0.2, -0.1, 0.3);
        let y = Vec3::new(-0.3, 0.2, 0.1);
        let (nodes, weights) = composite(-8.0, 8.0, 16, 8);
        let q: Vec<(f64, f64)> = nodes.into_iter().zip(weights).collect();
        let mut sum = 0.0;
        for (z1, w1) in &q {
            for (z2, w2) in &q {
                for (z3, w3) in &q {
                    let z = Vec3::new(*z1, *z2, *z3);
                    sum += w1 * w2 * w3
                        * gaussian_kernel(&sch, t, r, &x, &z).unwrap()
                        * gaussian_kernel(&sch, r, s, &z, &y).unwrap();
                }
            }
        }
        let direct = gaussian_kernel(&sch, t, s, &x, &y).unwrap();
        assert!(((sum - direct) / direct).abs() < 1e-8);
    }

    #[test]
    fn half_space_reference_value() {
        let p = Vec3::new(0.0, 0.0, 1.0);
        let v = halfspace_kernel(&HalfSpace::upper(), 1.0, 1.0, 0.0, &p, &p).unwrap();
        assert_relative_eq!(v, (4.0 * PI).powf(-1.5) * (1.0 - (-1.0f64).exp()), max_relative = 1e-14);
        assert!((v - 0.0141901).abs() < 1e-7);
        let on = Vec3::new(0.3, 0.1, 0.0);
        assert_eq!(halfspace_kernel(&HalfSpace::upper(), 1.0, 1.0, 0.0, &on, &p).unwrap(), 0.0);
        assert!(halfspace_kernel(&HalfSpace::upper(), 1.0, 1.0, 0.0, &-p, &p).is_err());
    }

    #[test]
    fn quadrant_is_product_of_half_lines() {
        let x = Vec3::new(1.0, 1.0, 0.0);
        let y = Vec3::new(0.5, 2.0, 0.3);
        let tau = 0.7;
        let half = |a: f64, b: f64| g1(tau, a - b) - g1(tau, a + b);
        let want = half(x.x, y.x) * half(x.y, y.y) * g1(tau, x.z - y.z);
        assert_relative_eq!(orthant_wedge_kernel(2, 1.0, tau, 0.0, &x, &y).unwrap(), want, max_relative = 1e-13);
        let bad = WedgeSpec::standard(1.0).unwrap();
        assert!(matches!(
            image_wedge_kernel(&bad, 1.0, 1.0, 0.0, &x, &y),
            Err(OracleError::UnsupportedAngle(_))
        ));
    }

    #[test]
    fn bessel_series_matches_images() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for m in [2usize, 3, 4] {
            let w = WedgeSpec::standard(PI / m as f64).unwrap();
            for _ in 0..20 {
                let mut pt = || {
                    let rho: f64 = rng.random_range(0.05..2.0);
                    let th: f64 = rng.random_range(0.0..PI / m as f64);
                    Vec3::new(rho * th.cos(), rho * th.sin(), rng.random_range(-1.0..1.0))
                };
                let (x, y) = (pt(), pt());
                let tau: f64 = rng.random_range(0.1..2.0);
                let a = orthant_wedge_kernel(m, 1.0, tau, 0.0, &x, &y).unwrap();
                let b = general_wedge_kernel(&w, 1.0, tau, 0.0, &x, &y, 1e-12).unwrap();
                assert!((a - b).abs() < 1e-8, "m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn wedge_kernel_vanishes_on_faces_and_decays_like_rho_to_pi_over_kappa() {
        let kappa = 1.5 * PI;
        let w = WedgeSpec::standard(kappa).unwrap();
        let y = Vec3::new(-0.5, 0.5, 0.0);
        let on_face = Vec3::new(0.7, 0.0, 0.1);
        assert_eq!(general_wedge_kernel(&w, 1.0, 1.0, 0.0, &on_face, &y, 1e-12).unwrap(), 0.0);
        let th = 0.5 * kappa;
        let at = |rho: f64| {
            let x = Vec3::new(rho * th.cos(), rho * th.sin(), 0.0);
            general_wedge_kernel(&w, 1.0, 1.0, 0.0, &x, &y, 1e-14).unwrap()
        };
        let slope = (at(1e-3).ln() - at(1e-4).ln()) / 10f64.ln();
        assert!((slope - PI / kappa).abs() < 0.02, "{slope}");
    }

    #[test]
    fn interval_series_agree_across_the_switch() {
        for &(x, y) in &[(0.3, 0.6), (0.05, 0.9), (0.5, 0.5)] {
            for tau in [0.02, 0.1, 0.3] {
                let sines = {
                    let mut s = 0.0;
                    for n in 1..2000 {
                        let k = n as f64 * PI;
                        s += 2.0 * (k * x).sin() * (k * y).sin() * (-k * k * tau).exp();
                    }
                    s
                };
                let v = interval_kernel(1.0, tau, x, y, 1e-14).unwrap();
                assert!((v - sines).abs() < 1e-12, "x={x} y={y} tau={tau}: {v} vs {sines}");
            }
        }
    }

    #[test]
    fn box_kernel_limits() {
        let c = Vec3::new(0.5, 0.5, 0.5);
        let short = box_kernel([1.0; 3], 1.0, 1e-3, 0.0, &c, &c, 1e-14).unwrap();
        assert!((short - heat_kernel(1e-3, &Vec3::zeros())).abs() < 1e-10);
        let lambda = cube_eigen_decay([1.0; 3]).unwrap();
        assert_relative_eq!(lambda, 3.0 * PI * PI, epsilon = 1e-12);
        assert!((lambda - 29.6088).abs() < 1e-4);
        let k = |t: f64| box_kernel([1.0; 3], 1.0, t, 0.0, &c, &c, 1e-16).unwrap().ln();
        let slope = (k(0.6) - k(0.3)) / 0.3;
        assert!(((-slope) - lambda).abs() < 0.005 * lambda);
        assert_relative_eq!(cube_eigen_decay([2.0, 1.0, 1.0]).unwrap(), 2.25 * PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn kernels_are_symmetric_and_below_free() {
        let pairs = [
            (Vec3::new(0.2, 0.3, 0.4), Vec3::new(0.7, 0.1, 0.5)),
            (Vec3::new(0.9, 0.5, 0.05), Vec3::new(0.4, 0.6, 0.3)),
        ];
        let kinds = [
            OracleKernel::Free,
            OracleKernel::HalfSpace,
            OracleKernel::OrthantWedge { m: 2 },
            OracleKernel::GeneralWedge { kappa: 1.2 },
            OracleKernel::Box { lengths: [1.0, 1.0, 1.0] },
        ];
        for k in kinds {
            for (x, y) in &pairs {
                for tau in [0.01, 0.2, 1.0] {
                    let a = k.eval(1.0, tau, 0.0, x, y, 1e-14).unwrap();
                    let b = k.eval(1.0, tau, 0.0, y, x, 1e-14).unwrap();
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-15, "{k:?}");
                    assert!(a >= 0.0 && a <= heat_kernel(tau, &(x - y)) * (1.0 + 1e-12), "{k:?}");
                }
            }
        }
    }
}

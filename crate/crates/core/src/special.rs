//! Bessel functions needed by the spectral bounds and the wedge kernel.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("series did not reach tolerance {tol:e} within {terms} terms")]
    SeriesNotConverged { tol: f64, terms: usize },
    #[error("Newton iteration for the Bessel zero stalled")]
    NewtonStalled,
}

/// Power series `Σ (-1)^k (x/2)^(2k+n) / (k! (k+n)!)` for integer order `n`.
fn bessel_j_series(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    let h2 = h * h;
    for k in 1..200 {
        term *= -h2 / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `J0(x)` by its power series; accurate to ~1e-15 for `|x| <= 8`.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_j_series(0, x)
}

/// `J1(x)` by its power series.
pub fn bessel_j1(x: f64) -> f64 {
    bessel_j_series(1, x)
}

/// First positive zero of `J0`, by Newton's method from 2.4 (`J0' = -J1`).
pub fn bessel_j0_first_zero() -> Result<f64, SpecialError> {
    let mut x = 2.4;
    for _ in 0..50 {
        let step = bessel_j0(x) / -bessel_j1(x);
        x -= step;
        if step.abs() < 1e-15 * x {
            return Ok(x);
        }
    }
    Err(SpecialError::NewtonStalled)
}

/// Exponentially scaled modified Bessel function `e^(-z) I_nu(z)` for
/// `nu >= 0`, `z >= 0`, with an a-posteriori bound on the truncated tail.
///
/// Returns `(value, tail_bound)`. Terms of the ascending series are summed in
/// log space, so large `z` does not overflow.
pub fn bessel_i_scaled(nu: f64, z: f64, tol: f64) -> Result<(f64, f64), SpecialError> {
    assert!(nu >= 0.0 && z >= 0.0);
    if z == 0.0 {
        return Ok((if nu == 0.0 { 1.0 } else { 0.0 }, 0.0));
    }
    let lh = (0.5 * z).ln();
    let log_term = |k: f64| (2.0 * k + nu) * lh - ln_gamma(k + 1.0) - ln_gamma(k + nu + 1.0) - z;
    // Largest term sits near k* solving (z/2)^2 = k (k + nu).
    let kstar = (0.5 * (-nu + (nu * nu + z * z).sqrt())).floor().max(0.0);
    let lmax = log_term(kstar);
    let max_terms = 20_000 + 4 * z as usize;
    let mut sum = 0.0;
    // Downward from the peak.
    let mut k = kstar;
    loop {
        let t = (log_term(k) - lmax).exp();
        sum += t;
        if k == 0.0 || t < 1e-18 * sum {
            break;
        }
        k -= 1.0;
    }
    // Upward from the peak with a geometric tail bound.
    let mut k = kstar + 1.0;
    let mut count = 0usize;
    loop {
        let t = (log_term(k) - lmax).exp();
        sum += t;
        let ratio = 0.25 * z * z / ((k + 1.0) * (k + nu + 1.0));
        if ratio < 1.0 {
            let tail = t * ratio / (1.0 - ratio);
            let scale = lmax.exp();
            if tail * scale <= tol.max(1e-17 * sum * scale) {
                return Ok((sum * scale, tail * scale));
            }
        }
        k += 1.0;
        count += 1;
        if count > max_terms {
            return Err(SpecialError::SeriesNotConverged { tol, terms: count });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn j0_zero_matches_tabulated_value() {
        let z = bessel_j0_first_zero().unwrap();
        assert_relative_eq!(z, 2.404_825_557_695_773, epsilon = 1e-13);
        assert!(bessel_j0(z).abs() < 1e-14);
    }

    #[test]
    fn j0_j1_known_values() {
        assert_relative_eq!(bessel_j0(1.0), 0.765_197_686_557_966_6, epsilon = 1e-15);
        assert_relative_eq!(bessel_j1(1.0), 0.440_050_585_744_933_5, epsilon = 1e-15);
    }

    #[test]
    fn half_integer_order_closed_forms() {
        // I_{1/2}(z) = sqrt(2/(pi z)) sinh z, I_{3/2}(z) = sqrt(2/(pi z)) (cosh z - sinh z / z).
        for &z in &[0.1, 1.0, 5.0, 30.0, 200.0] {
            let c = (2.0 / (std::f64::consts::PI * z)).sqrt();
            let i_half = c * (0.5 * (1.0 - (-2.0 * z).exp()));
            let i_3half = c * (0.5 * (1.0 + (-2.0 * z).exp()) - 0.5 * (1.0 - (-2.0 * z).exp()) / z);
            let (v, _) = bessel_i_scaled(0.5, z, 1e-16).unwrap();
            assert_relative_eq!(v, i_half, max_relative = 1e-12);
            let (v, _) = bessel_i_scaled(1.5, z, 1e-16).unwrap();
            assert_relative_eq!(v, i_3half, max_relative = 1e-11);
        }
    }

    #[test]
    fn integer_order_via_recurrence() {
        // I_{n-1} - I_{n+1} = (2n/z) I_n.
        let z = 3.7;
        let i = |n: f64| bessel_i_scaled(n, z, 1e-18).unwrap().0;
        for n in 1..6 {
            let n = n as f64;
            assert_relative_eq!(i(n - 1.0) - i(n + 1.0), 2.0 * n / z * i(n), max_relative = 1e-12);
        }
    }
}

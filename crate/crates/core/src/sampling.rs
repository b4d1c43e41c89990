//! Deterministic low-discrepancy point sets.

use crate::geometry::Vec3;

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Radical inverse of `index` in the given base.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

/// Point `index` of the Halton sequence in `[0, 1)^dim` (`dim <= 6`).
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    PRIMES[..dim].iter().map(|&b| radical_inverse(index, b)).collect()
}

/// First `count` Halton points inside the unit ball (cube rejection).
pub fn halton_ball(count: usize) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let p = Vec3::new(
            2.0 * radical_inverse(i, 2) - 1.0,
            2.0 * radical_inverse(i, 3) - 1.0,
            2.0 * radical_inverse(i, 5) - 1.0,
        );
        if p.norm_squared() <= 1.0 {
            out.push(p);
        }
        i += 1;
    }
    out
}

/// `count` nearly uniform unit vectors on a Fibonacci spiral.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

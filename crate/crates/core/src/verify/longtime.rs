use serde::{Deserialize, Serialize};

use super::{residual_fit, step, stream, weighted_fit, McParams, VerifyError};
use crate::geometry::{Polyhedron, Vec3};
use crate::oracles::{box_kernel, cube_eigen_decay, isotropic_diffusivity};
use crate::sde_mc::{kill_times, CoefficientSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LongtimeMode {
    /// Slope of `log K(t, 0, c, c)` from the box oracle at the center `c`.
    Oracle,
    /// Slope of the log survival probability of paths from the centroid.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongtimeReport {
    pub mode: LongtimeMode,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub rate: f64,
    pub rate_stderr: f64,
    /// `ν₁ λ` for boxes, where `λ` is the first Dirichlet eigenvalue.
    pub reference: Option<f64>,
    pub rel_error: Option<f64>,
    /// Rates of the bounding box (`ν₁ λ`) and of the largest inscribed cube
    /// about the centroid (`ν₂ λ`); the fitted rate should lie between them.
    pub bracket: (f64, f64),
    pub within_bracket: bool,
    pub paths: usize,
}

fn box_sides(poly: &Polyhedron) -> Option<[f64; 3]> {
    let (lo, hi) = poly.bounding_box();
    if poly.vertices().len() != 8 || poly.faces().len() != 6 || lo.norm() > 1e-12 {
        return None;
    }
    let corner = |v: &Vec3| (0..3).all(|i| (v[i] - lo[i]).abs() < 1e-12 || (v[i] - hi[i]).abs() < 1e-12);
    poly.vertices().iter().all(corner).then(|| [hi.x, hi.y, hi.z])
}

/// Side of the largest axis-aligned cube centered at `c` inside the polyhedron.
/// Only meaningful for convex polyhedra.
pub fn inscribed_cube(poly: &Polyhedron, c: &Vec3) -> f64 {
    poly.faces()
        .iter()
        .map(|f| 2.0 * (f.offset - f.normal.dot(c)) / f.normal.abs().sum())
        .fold(f64::INFINITY, f64::min)
}

/// Long-time exponential decay rate of the killed diffusion in a bounded
/// polyhedron. The fitting window is `[2, 5] / (ν₁ λ_box)` for survival
/// counts and `[6, 9] / (ν₁ λ_box)` for the box oracle, with `λ_box` the
/// eigenvalue of the bounding box.
pub fn check_longtime_decay(
    poly: &Polyhedron,
    schedule: &CoefficientSchedule,
    mode: LongtimeMode,
    mc: &McParams,
) -> Result<LongtimeReport, VerifyError> {
    let sides = box_sides(poly);
    let (lo, hi) = poly.bounding_box();
    let outer = cube_eigen_decay([hi.x - lo.x, hi.y - lo.y, hi.z - lo.z])?;
    let center = poly.centroid();
    let inner_side = inscribed_cube(poly, &center);
    let inner = cube_eigen_decay([inner_side; 3])?;
    let bracket = (schedule.nu1() * outer, schedule.nu2() * inner);
    let reference = sides.map(|l| cube_eigen_decay(l).map(|lambda| schedule.nu1() * lambda)).transpose()?;
    let lam = sides.map(cube_eigen_decay).transpose()?.unwrap_or(outer) * schedule.nu1();
    // Oracle values are noise-free, so they can be fitted late enough for
    // higher modes to be negligible; MC survival runs out of signal there.
    let first = match mode {
        LongtimeMode::Oracle => 6.0,
        LongtimeMode::MonteCarlo => 2.0,
    };
    let times: Vec<f64> = (0..7).map(|k| (first + 0.5 * k as f64) / lam).collect();
    let (values, stderrs, paths) = match mode {
        LongtimeMode::Oracle => {
            let l = sides.ok_or_else(|| VerifyError::Unsupported("the box oracle needs an axis-aligned box at the origin".into()))?;
            let c = isotropic_diffusivity(schedule)?;
            let mid = Vec3::new(l[0] / 2.0, l[1] / 2.0, l[2] / 2.0);
            let v = times
                .iter()
                .map(|&t| box_kernel(l, c, t, 0.0, &mid, &mid, 1e-16))
                .collect::<Result<Vec<_>, _>>()?;
            let n = v.len();
            (v, vec![0.0; n], 0)
        }
        LongtimeMode::MonteCarlo => {
            let horizon = *times.last().unwrap();
            let mut alive = vec![0usize; times.len()];
            kill_times(
                &crate::geometry::Domain::Polyhedron(poly.clone()),
                schedule,
                0.0,
                &center,
                horizon,
                step(mc, horizon),
                stream(0)..stream(0) + mc.max_paths as u64,
                mc.seed,
                mc.bridge,
                |kt| {
                    for k in kt {
                        for (a, t) in alive.iter_mut().zip(&times) {
                            if k > t {
                                *a += 1;
                            }
                        }
                    }
                },
            )?;
            let n = mc.max_paths as f64;
            let p: Vec<f64> = alive.iter().map(|&a| a as f64 / n).collect();
            let se = p.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
            (p, se, mc.max_paths)
        }
    };
    let usable: Vec<usize> = (0..times.len())
        .filter(|&i| values[i] > 0.0 && (stderrs[i] == 0.0 || stderrs[i] < 0.2 * values[i]))
        .collect();
    if usable.len() < 3 {
        return Err(VerifyError::HorizonTooShort(format!(
            "only {} times have a usable signal",
            usable.len()
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|&i| times[i]).collect();
    let ys: Vec<f64> = usable.iter().map(|&i| values[i].ln()).collect();
    let (slope, se, _) = if usable.iter().all(|&i| stderrs[i] == 0.0) {
        residual_fit(&xs, &ys)
    } else {
        let ws: Vec<f64> = usable.iter().map(|&i| (values[i] / stderrs[i].max(1e-300)).powi(2)).collect();
        weighted_fit(&xs, &ys, &ws)
    };
    let rate = -slope;
    Ok(LongtimeReport {
        mode,
        rel_error: reference.map(|r| (rate - r).abs() / r),
        reference,
        within_bracket: rate >= bracket.0 * (1.0 - 0.1) && rate <= bracket.1 * (1.0 + 0.1),
        bracket,
        times,
        values,
        stderrs,
        rate,
        rate_stderr: se,
        paths,
    })
}

use std::f64::consts::PI;

use statrs::function::erf::erf;

use super::*;
use crate::geometry::{builtin_domain, Domain, Vec3};

fn half_space() -> Domain {
    builtin_domain("half_space").unwrap()
}

#[test]
fn runs_are_reproducible_and_partition_invariant() {
    let d = builtin_domain("octant").unwrap();
    let sch = CoefficientSchedule::two_piece(0.5, 1.0, 2.0).unwrap();
    let y = Vec3::new(0.5, 0.6, 0.7);
    let a = simulate_paths(&d, &sch, 0.0, &y, 1.0, 0.05, 500, 7, true).unwrap();
    let b = simulate_paths(&d, &sch, 0.0, &y, 1.0, 0.05, 500, 7, true).unwrap();
    assert_eq!(a.records, b.records);
    let tail = simulate_batch(&d, &sch, 0.0, &y, 1.0, 0.05, 300..500, 7, true).unwrap();
    assert_eq!(&a.records[300..], &tail[..]);
    let c = simulate_paths(&d, &sch, 0.0, &y, 1.0, 0.05, 500, 8, true).unwrap();
    assert_ne!(a.records, c.records);
    for r in &a.records {
        if r.survived {
            assert!(d.contains(&Vec3::from(r.position)));
        } else {
            assert!(r.time > 0.0 && r.time <= 1.0);
        }
    }
}

#[test]
fn free_terminal_covariance() {
    let n = 20_000;
    let e = simulate_paths(&Domain::Free, &CoefficientSchedule::heat(), 0.0, &Vec3::zeros(), 1.5, 0.5, n, 1, false)
        .unwrap();
    assert_eq!(survival_probability(&e), (1.0, 0.0));
    let pts: Vec<Vec3> = e.survivors().collect();
    for i in 0..3 {
        for j in 0..3 {
            let cov = pts.iter().map(|p| p[i] * p[j]).sum::<f64>() / n as f64;
            let want = if i == j { 3.0 } else { 0.0 };
            // Var of x_i x_j is 2*3^2 on the diagonal and 3^2 off it.
            let se = if i == j { (18.0 / n as f64).sqrt() } else { (9.0 / n as f64).sqrt() };
            assert!((cov - want).abs() < 3.0 * se, "cov[{i}][{j}] = {cov}");
        }
    }
}

#[test]
fn half_space_survival_with_bridge() {
    let y = Vec3::new(0.0, 0.0, 1.0);
    let sch = CoefficientSchedule::heat();
    let exact = erf(0.5);
    let coarse = simulate_paths(&half_space(), &sch, 0.0, &y, 1.0, 0.1, 20_000, 3, true).unwrap();
    let fine = simulate_paths(&half_space(), &sch, 0.0, &y, 1.0, 0.025, 20_000, 4, true).unwrap();
    let (pc, sc) = survival_probability(&coarse);
    let (pf, sf) = survival_probability(&fine);
    assert!((pc - exact).abs() < 3.0 * sc, "{pc} vs {exact}");
    assert!((pf - exact).abs() < 3.0 * sf, "{pf} vs {exact}");
    assert!((pc - pf).abs() < 3.0 * sc.hypot(sf));
}

#[test]
fn missing_bridge_overestimates_survival() {
    let y = Vec3::new(0.0, 0.0, 1.0);
    let sch = CoefficientSchedule::heat();
    let n = 20_000;
    let p = |dt: f64| survival_probability(&simulate_paths(&half_space(), &sch, 0.0, &y, 1.0, dt, n, 5, false).unwrap());
    let (coarse, sc) = p(0.1);
    let (fine, _) = p(0.025);
    let exact = erf(0.5);
    assert!(coarse > fine + 3.0 * sc && fine > exact, "{coarse} {fine} {exact}");
}

#[test]
fn free_density_at_start() {
    let y = Vec3::zeros();
    let e = simulate_paths(&Domain::Free, &CoefficientSchedule::heat(), 0.0, &y, 1.0, 1.0, 100_000, 11, false).unwrap();
    let h = 0.4;
    let g = estimate_green(&e, &y, h).unwrap();
    let exact = (4.0 * PI).powf(-1.5);
    // Ball average of a variance-2 Gaussian at its peak: 1 - (3/5) h^2 / 4 to leading order.
    let bias = exact * 0.6 * h * h / 4.0;
    assert!((g.value - exact).abs() < 3.0 * g.stderr + bias, "{g:?} vs {exact}");
    let far = estimate_green(&e, &Vec3::new(50.0, 0.0, 0.0), h).unwrap();
    assert_eq!((far.value, far.count), (0.0, 0));
}

#[test]
fn zero_horizon_keeps_every_path_at_the_start() {
    let y = Vec3::new(0.2, 0.3, 0.4);
    let e = simulate_paths(&builtin_domain("cube").unwrap(), &CoefficientSchedule::heat(), 1.0, &y, 1.0, 0.1, 50, 0, true)
        .unwrap();
    assert_eq!(survival_probability(&e).0, 1.0);
    let g = estimate_green(&e, &y, 0.05).unwrap();
    assert_eq!(g.count, 50);
    assert!((g.value - 1.0 / (4.0 / 3.0 * PI * 0.05f64.powi(3))).abs() < 1e-9);
}

#[test]
fn window_volume_near_the_boundary() {
    let d = half_space();
    let h: f64 = 0.5;
    let ball = 4.0 / 3.0 * PI * h.powi(3);
    assert_eq!(window_volume(&d, &Vec3::new(0.0, 0.0, 1.0), h), ball);
    let on_plane = window_volume(&d, &Vec3::zeros(), h);
    assert!((on_plane / ball - 0.5).abs() < 5e-3);
    assert_eq!(window_volume(&d, &Vec3::new(0.0, 0.0, -1.0), h), 0.0);
    let e = simulate_paths(&d, &CoefficientSchedule::heat(), 0.0, &Vec3::new(0.0, 0.0, 1.0), 1.0, 0.5, 10, 0, true).unwrap();
    assert_eq!(
        estimate_green(&e, &Vec3::new(0.0, 0.0, -1.0), h).unwrap_err(),
        SdeError::EmptyWindowVolume
    );
}

#[test]
fn invalid_inputs() {
    let d = half_space();
    let sch = CoefficientSchedule::heat();
    assert_eq!(
        simulate_paths(&d, &sch, 0.0, &Vec3::zeros(), 1.0, 0.1, 10, 0, false).unwrap_err(),
        SdeError::StartOnBoundary
    );
    assert!(matches!(
        simulate_paths(&d, &sch, 0.0, &Vec3::new(0.0, 0.0, 1.0), 1.0, 2.0, 10, 0, false),
        Err(SdeError::StepTooLarge { .. })
    ));
    assert_eq!(
        simulate_paths(&d, &sch, 0.0, &Vec3::new(0.0, 0.0, 1.0), 1.0, 0.1, 0, 0, false).unwrap_err(),
        SdeError::NoPaths
    );
}

#[test]
fn steps_align_with_breakpoints() {
    // Free motion under {I before 0.3, 4I after}: the terminal variance per
    // coordinate is 2 (0.3 + 4 * 0.7) = 6.2 whatever the step.
    let sch = CoefficientSchedule::two_piece(0.3, 1.0, 4.0).unwrap();
    let n = 20_000;
    let e = simulate_paths(&Domain::Free, &sch, 0.0, &Vec3::zeros(), 1.0, 0.25, n, 2, false).unwrap();
    let var = e.survivors().map(|p| p.x * p.x).sum::<f64>() / n as f64;
    assert!((var - 6.2).abs() < 3.0 * 6.2 * (2.0 / n as f64).sqrt(), "{var}");
}

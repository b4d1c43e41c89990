use std::f64::consts::PI;

use conekernel::geometry::{builtin_domain, Domain, Vec3};
use conekernel::oracles::OracleKernel;
use conekernel::sde_mc::{builtin_schedule, estimate_green_from, simulate_paths, CoefficientSchedule};
use conekernel::verify::*;
use conekernel::weights::WeightParams;
use nalgebra::{Matrix3, Rotation3, Vector3};

fn polyhedron(name: &str) -> conekernel::geometry::Polyhedron {
    match builtin_domain(name).unwrap() {
        Domain::Polyhedron(p) => p,
        _ => unreachable!(),
    }
}

#[test]
fn flat_face_decay_is_linear() {
    let d = builtin_domain("half_space").unwrap();
    let mc = McParams {
        paths: 20_000,
        max_paths: 400_000,
        min_count: 400,
        dt: 0.02,
        ..McParams::default()
    };
    let fit = fit_decay(&d, &CoefficientSchedule::heat(), Feature::Face(0), 1.0, 0.5, &mc).unwrap();
    assert_eq!(fit.reference, Some(1.0));
    assert!((fit.exponent - 1.0).abs() < 0.1, "{} ± {}", fit.exponent, fit.stderr);
    assert!(fit.ci.0 < fit.exponent && fit.exponent < fit.ci.1);
}

#[test]
fn decay_rejects_missing_features() {
    let d = builtin_domain("half_space").unwrap();
    let err = fit_decay(&d, &CoefficientSchedule::heat(), Feature::Vertex(0), 1.0, 0.5, &McParams::default()).unwrap_err();
    assert!(matches!(err, VerifyError::BadFeature(_)), "{err}");
}

#[test]
fn oracle_chapman_kolmogorov() {
    let x = Vec3::new(0.3, -0.2, 0.6);
    let y = Vec3::new(-0.1, 0.4, 0.9);
    let free = check_chapman_kolmogorov(&OracleKernel::Free, 1.0, 0.5, 0.2, 0.0, &x, &y, 12).unwrap();
    assert!(free.rel_error < 1e-10, "{free:?}");
    let half = check_chapman_kolmogorov(&OracleKernel::HalfSpace, 1.0, 0.5, 0.2, 0.0, &x, &y, 12).unwrap();
    assert!(half.rel_error < 1e-6, "{half:?}");
    assert!(half.direct < free.direct);
}

#[test]
fn composition_needs_ordered_times() {
    let x = Vec3::new(0.3, 0.2, 0.6);
    let err = check_chapman_kolmogorov(&OracleKernel::Free, 1.0, 0.5, 0.6, 0.0, &x, &x, 4).unwrap_err();
    assert!(matches!(err, VerifyError::Unsupported(_)));
}

#[test]
fn box_kernel_grows_with_the_box() {
    let x = Vec3::new(0.7, 0.5, 0.5);
    let y = Vec3::new(0.5, 0.5, 0.5);
    let r = oracle_monotonicity(&[1.0, 2.0, 4.0], 1.0, 0.1, 0.0, &x, &y).unwrap();
    assert!(r.violations.is_empty(), "{r:?}");
    assert!(r.values.windows(2).all(|w| w[0] < w[1]));
    let free = conekernel::oracles::heat_kernel(0.1, &(x - y));
    assert!(r.values[2] < free);
}

#[test]
fn longtime_oracle_matches_box_eigenvalues() {
    let heat = CoefficientSchedule::heat();
    for (name, sides) in [("cube", [1.0, 1.0, 1.0]), ("box(2,1,1)", [2.0, 1.0, 1.0])] {
        let r = check_longtime_decay(&polyhedron(name), &heat, LongtimeMode::Oracle, &McParams::default()).unwrap();
        let exact = PI * PI * sides.iter().map(|l: &f64| l.powi(-2)).sum::<f64>();
        assert!((r.reference.unwrap() - exact).abs() < 1e-12);
        assert!(r.rel_error.unwrap() < 0.02, "{name}: {r:?}");
        assert!(r.within_bracket, "{name}: {:?}", r.bracket);
    }
}

#[test]
fn inscribed_cube_of_the_unit_cube() {
    let p = polyhedron("cube");
    assert!((inscribed_cube(&p, &Vec3::repeat(0.5)) - 1.0).abs() < 1e-12);
    assert!((inscribed_cube(&p, &Vec3::new(0.25, 0.5, 0.5)) - 0.5).abs() < 1e-12);
}

#[test]
fn bound_check_rejects_bad_inputs() {
    let d = builtin_domain("octant").unwrap();
    let heat = CoefficientSchedule::heat();
    let good = WeightParams::uniform(&d, 2.5, 1.5).unwrap();
    let grid = BoundGrid {
        times: vec![1.0],
        targets: vec![[1.2, 1.2, 1.2]],
        features: vec![Feature::Vertex(0)],
        start_distance: 1.0,
        levels: 1,
    };
    let err = check_upper_bound(&d, &heat, &good, &good, &grid, &McParams::default()).unwrap_err();
    assert!(matches!(err, VerifyError::Unsupported(_)), "{err}");

    let cube = builtin_domain("cube").unwrap();
    let grid = BoundGrid { levels: 3, ..grid };
    let err = check_upper_bound(&d, &heat, &WeightParams::uniform(&cube, 2.5, 1.5).unwrap(), &good, &grid, &McParams::default())
        .unwrap_err();
    assert!(matches!(err, VerifyError::InadmissibleLambda(_)), "{err}");
}

#[test]
fn approach_scale_limits_face_starts() {
    let d = builtin_domain("octant").unwrap();
    let (foot, _) = approach_point(&d, Feature::Face(0)).unwrap();
    let s = approach_scale(&d, Feature::Face(0), &foot);
    assert!(s.is_finite() && s > 0.0 && s < 1.0);
    let (foot, _) = approach_point(&d, Feature::Vertex(0)).unwrap();
    assert!(approach_scale(&d, Feature::Vertex(0), &foot).is_infinite());
}

#[test]
fn time_reversal_detects_a_wrong_adjoint() {
    let cube = builtin_domain("cube").unwrap();
    let ra = Rotation3::from_axis_angle(&Vector3::z_axis(), 0.6).into_inner();
    let rb = Rotation3::from_axis_angle(&Vector3::x_axis(), 0.9).into_inner();
    let a = ra * Matrix3::from_diagonal(&Vector3::new(3.0, 0.2, 0.5)) * ra.transpose();
    let b = rb * Matrix3::from_diagonal(&Vector3::new(0.2, 0.5, 3.0)) * rb.transpose();
    let sch = CoefficientSchedule::new(vec![0.0], vec![a, b]).unwrap();
    let y = Vec3::new(0.2, 0.3, 0.5);
    let x = Vec3::new(0.55, 0.5, 0.75);
    let mc = McParams {
        paths: 200_000,
        max_paths: 1_000_000,
        dt: 0.005,
        seed: 7,
        ..McParams::default()
    };
    let good = check_time_reversal(&cube, &sch, -0.04, &y, 0.04, &x, 0.08, &mc).unwrap();
    let bad = check_time_reversal_with(&cube, &sch, &sch, -0.04, &y, 0.04, &x, 0.08, &mc).unwrap();
    assert!(good.z.abs() <= 3.0, "{good:?}");
    assert!(bad.z.abs() > 3.0, "{bad:?}");
}

#[test]
fn time_reversal_with_a_piecewise_schedule() {
    let cube = builtin_domain("cube").unwrap();
    let two = builtin_schedule("two_piece").unwrap();
    let y = Vec3::new(0.35, 0.45, 0.5);
    let x = Vec3::new(0.6, 0.55, 0.45);
    let mc = McParams {
        paths: 100_000,
        max_paths: 300_000,
        dt: 0.005,
        seed: 3,
        ..McParams::default()
    };
    let r = check_time_reversal(&cube, &two, -0.05, &y, 0.05, &x, 0.08, &mc).unwrap();
    assert!(r.z.abs() <= 3.0, "{r:?}");
}

#[test]
fn killed_estimates_stay_below_the_gaussian_envelope() {
    let cube = builtin_domain("cube").unwrap();
    let two = builtin_schedule("two_piece").unwrap();
    let y = Vec3::new(0.35, 0.45, 0.5);
    let x = Vec3::new(0.6, 0.55, 0.45);
    let e = simulate_paths(&cube, &two, -0.05, &y, 0.05, 0.005, 100_000, 5, true).unwrap();
    let terminals: Vec<Vec3> = e.survivors().collect();
    let g = estimate_green_from(&cube, &terminals, e.n_paths(), &x, 0.08).unwrap();
    let check = check_gaussian_domination(&two, 0.1, &x, &y, &g);
    assert!(!check.violated, "{check:?}");
    assert!(check.bound > check.estimate);

    let inflated = conekernel::sde_mc::GreenEstimate { value: 10.0 * check.bound, ..g };
    assert!(check_gaussian_domination(&two, 0.1, &x, &y, &inflated).violated);
}

#[test]
fn domination_bound_at_zero_distance() {
    let heat = CoefficientSchedule::heat();
    let b = domination_bound(&heat, 0.25, 0.0);
    assert!((b - PI.powf(-1.5)).abs() < 1e-14);
    assert!(domination_bound(&heat, 0.25, 1.0) < b);
}

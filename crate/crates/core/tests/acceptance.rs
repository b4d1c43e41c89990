//! Acceptance run: one line per criterion, nonzero exit status if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use conekernel::exponents::{edge_exponent_heat, platonic_reference, vertex_exponent_heat};
use conekernel::geometry::{builtin_domain, platonic_solid, Domain, PlatonicSolid, PolyhedralCone, Polyhedron, Vec3, WedgeSpec};
use conekernel::oracles::OracleKernel;
use conekernel::sde_mc::{builtin_schedule, estimate_green_from, simulate_paths, CoefficientSchedule};
use conekernel::spectral::{faber_krahn_lower_bounds, first_eigenvalue, polygon_area, EigenOptions};
use conekernel::verify::*;
use conekernel::weights::{weight, weight_poly, weight_poly_inf, WeightParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn cone(name: &str) -> PolyhedralCone {
    match builtin_domain(name).unwrap() {
        Domain::Cone(c) => c,
        _ => unreachable!(),
    }
}

fn polyhedron(name: &str) -> Polyhedron {
    match builtin_domain(name).unwrap() {
        Domain::Polyhedron(p) => p,
        _ => unreachable!(),
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn platonic_table() -> Outcome {
    let mut worst: f64 = 0.0;
    for (solid, name) in [
        (PlatonicSolid::Tetrahedron, "tetrahedron"),
        (PlatonicSolid::Cube, "cube"),
        (PlatonicSolid::Octahedron, "octahedron"),
        (PlatonicSolid::Dodecahedron, "dodecahedron"),
        (PlatonicSolid::Icosahedron, "icosahedron"),
    ] {
        let p = platonic_solid(solid);
        let (kappa, omega) = platonic_reference(name).map_err(err)?;
        for e in p.edges() {
            worst = worst.max((e.kappa - kappa).abs());
        }
        for v in 0..p.vertices().len() {
            worst = worst.max((p.solid_angle(v).map_err(err)? - omega).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max angle error {worst:.1e} over five solids (tol 1e-9)")))
}

fn eigenvalue_oracles() -> Outcome {
    let opts = EigenOptions::default();
    let octant = first_eigenvalue(&cone("octant"), &opts).map_err(err)?.value;
    let hemi = PolyhedralCone::regular(64, PI / 2.0 - 0.002).map_err(err)?;
    let disc = first_eigenvalue(&hemi, &opts).map_err(err)?.value;
    let ok = (octant - 12.0).abs() <= 0.02 * 12.0 && (disc - 2.0).abs() <= 0.01 * 2.0;
    Ok((ok, format!("octant {octant:.4} (12 ± 2%), 64-gon {disc:.4} (2 ± 1%)")))
}

fn faber_krahn_chain() -> Outcome {
    let opts = EigenOptions::default();
    let mut polygons: Vec<(String, PolyhedralCone)> = vec![
        ("octant".into(), cone("octant")),
        ("octant_complement".into(), cone("octant_complement")),
        ("64-gon".into(), PolyhedralCone::regular(64, PI / 2.0 - 0.002).map_err(err)?),
    ];
    for (n, theta) in [(3, 0.3), (3, 0.6), (5, 1.1), (6, 1.3)] {
        polygons.push((format!("{n}-gon({theta})"), PolyhedralCone::regular(n, theta).map_err(err)?));
    }
    for name in ["tetrahedron", "octahedron", "dodecahedron", "icosahedron"] {
        polygons.push((format!("{name} vertex"), polyhedron(name).vertex_cones()[0].clone()));
    }
    let mut ok = true;
    let mut tightest = f64::INFINITY;
    for (name, c) in &polygons {
        let e0 = first_eigenvalue(c, &opts).map_err(err)?.value;
        let b = faber_krahn_lower_bounds(polygon_area(c)).map_err(err)?;
        if e0 < b.best {
            ok = false;
            eprintln!("    {name}: E0 {e0} below cap bound {}", b.best);
        }
        tightest = tightest.min(e0 / b.best);
    }
    let half = faber_krahn_lower_bounds(2.0 * PI).map_err(err)?.log_bound;
    ok &= (half - 1.0 / 2f64.ln()).abs() < 1e-12 && half <= 2.0;
    Ok((
        ok,
        format!("{} polygons, min E0/bound {tightest:.3}; log bound at 2π {half:.4} ≤ 2", polygons.len()),
    ))
}

fn exponent_formulas() -> Outcome {
    let exact = vertex_exponent_heat(12.0).map_err(err)? == 3.0 && edge_exponent_heat(PI / 2.0).map_err(err)? == 2.0;
    let mc = McParams {
        paths: 50_000,
        max_paths: 20_000_000,
        min_count: 400,
        dt: 0.02,
        seed: 1,
        bridge: true,
    };
    let heat = CoefficientSchedule::heat();
    let v = fit_decay(&builtin_domain("octant").unwrap(), &heat, Feature::Vertex(0), 1.0, 0.5, &mc).map_err(err)?;
    let e = fit_decay(&builtin_domain("quarter_space_wedge").unwrap(), &heat, Feature::Edge(0), 1.0, 0.5, &mc).map_err(err)?;
    let ok = exact && (v.exponent - 3.0).abs() <= 0.2 && (e.exponent - 2.0).abs() <= 0.15;
    Ok((
        ok,
        format!(
            "formulas exact: {exact}; octant vertex {:.3} ± {:.3} (3 ± 0.2), quarter-space edge {:.3} ± {:.3} (2 ± 0.15)",
            v.exponent, v.stderr, e.exponent, e.stderr
        ),
    ))
}

fn mc_against_oracles() -> Outcome {
    let d = builtin_domain("half_space").unwrap();
    let y = Vec3::new(0.0, 0.0, 1.0);
    let e = simulate_paths(&d, &CoefficientSchedule::heat(), 0.0, &y, 1.0, 0.05, 1_000_000, 5, true).map_err(err)?;
    let h = 0.4;
    let terminals: Vec<Vec3> = e.survivors().collect();
    let g = estimate_green_from(&d, &terminals, e.n_paths(), &y, h).map_err(err)?;
    let peak = (4.0 * PI).powf(-1.5);
    let exact = peak * (1.0 - (-1.0f64).exp());
    // Ball average minus center value: h²/10 times the Laplacian of the free
    // peak (-3/2) and of the image at distance 2 (-1/2 e^{-1}).
    let bias = h * h / 10.0 * peak * (1.5 - 0.5 * (-1.0f64).exp());
    let mc_ok = (g.value - exact).abs() <= 3.0 * g.stderr + bias;

    let quarter = WedgeSpec::standard(PI / 2.0).map_err(err)?;
    let mut worst: f64 = 0.0;
    let pts = [
        (Vec3::new(0.5, 0.5, 0.0), Vec3::new(0.7, 0.2, 0.3)),
        (Vec3::new(1.0, 0.1, -0.4), Vec3::new(0.3, 0.9, 0.2)),
        (Vec3::new(0.2, 0.2, 0.0), Vec3::new(0.25, 0.15, 0.1)),
        (Vec3::new(2.0, 1.0, 0.0), Vec3::new(1.5, 1.5, 0.5)),
    ];
    for tau in [0.1, 1.0, 4.0] {
        for (x, z) in &pts {
            let img = OracleKernel::OrthantWedge { m: 2 }.eval(1.0, tau, 0.0, x, z, 1e-15).map_err(err)?;
            let ser = OracleKernel::GeneralWedge { kappa: quarter.kappa() }.eval(1.0, tau, 0.0, x, z, 1e-15).map_err(err)?;
            worst = worst.max((img - ser).abs() / img);
        }
    }
    Ok((
        mc_ok && worst <= 1e-8,
        format!(
            "half-space G {:.6} ± {:.6} vs {exact:.6} (window bias {bias:.1e}); quadrant images vs series rel {worst:.1e} (tol 1e-8)",
            g.value, g.stderr
        ),
    ))
}

fn bound_check() -> Outcome {
    let d = builtin_domain("octant").unwrap();
    let heat = CoefficientSchedule::heat();
    let diag = Vec3::repeat(1.0 / 3f64.sqrt());
    let grid = BoundGrid {
        times: vec![1.0],
        targets: vec![(1.2 * diag).into(), (2.0 * diag).into(), [1.5, 0.6, 0.6]],
        features: vec![Feature::Vertex(0), Feature::Edge(0), Feature::Face(0)],
        start_distance: 1.0,
        levels: 3,
    };
    let mc = McParams {
        paths: 50_000,
        max_paths: 20_000_000,
        min_count: 100,
        dt: 0.02,
        seed: 1,
        bridge: true,
    };
    let good = WeightParams::uniform(&d, 2.5, 1.5).map_err(err)?;
    let bad = WeightParams::uniform(&d, 3.5, 1.5).map_err(err)?;
    let a = check_upper_bound(&d, &heat, &good, &good, &grid, &mc).map_err(err)?;
    let b = check_upper_bound(&d, &heat, &bad, &bad, &grid, &mc).map_err(err)?;
    let growth = |r: &BoundReport| {
        r.features.iter().map(|f| format!("{} {:.2}", f.feature, f.growth)).collect::<Vec<_>>().join(", ")
    };
    let ok = a.sup_ratio.is_finite() && !a.divergent && b.divergent;
    Ok((
        ok,
        format!(
            "vertex 2.5: sup {:.3e}, growth [{}]; vertex 3.5: divergent {} [{}]",
            a.sup_ratio,
            growth(&a),
            b.divergent,
            growth(&b)
        ),
    ))
}

fn identities() -> Outcome {
    let x = Vec3::new(0.3, -0.2, 0.6);
    let z = Vec3::new(-0.1, 0.4, 0.9);
    let mut ck: f64 = 0.0;
    for kernel in [OracleKernel::Free, OracleKernel::HalfSpace] {
        ck = ck.max(check_chapman_kolmogorov(&kernel, 1.0, 0.5, 0.2, 0.0, &x, &z, 12).map_err(err)?.rel_error);
    }
    let b = Vec3::new(0.3, 0.6, 0.4);
    let ck_box = check_chapman_kolmogorov(&OracleKernel::Box { lengths: [1.0; 3] }, 1.0, 0.05, 0.02, 0.0, &b, &Vec3::new(0.5, 0.5, 0.5), 12)
        .map_err(err)?;
    ck = ck.max(ck_box.rel_error);

    let cube = builtin_domain("cube").unwrap();
    let two = builtin_schedule("two_piece").map_err(err)?;
    let y = Vec3::new(0.35, 0.45, 0.5);
    let x = Vec3::new(0.6, 0.55, 0.45);
    let mc = McParams {
        paths: 200_000,
        max_paths: 1_000_000,
        min_count: 200,
        dt: 0.005,
        seed: 7,
        bridge: true,
    };
    let tr = check_time_reversal(&cube, &two, -0.05, &y, 0.05, &x, 0.08, &mc).map_err(err)?;

    let e = simulate_paths(&cube, &two, -0.05, &y, 0.05, 0.005, 1_000_000, 11, true).map_err(err)?;
    let terminals: Vec<Vec3> = e.survivors().collect();
    let mut worst_z = f64::NEG_INFINITY;
    for i in 0..5 {
        for j in 0..5 {
            let p = Vec3::new(0.1 + 0.2 * i as f64, 0.1 + 0.2 * j as f64, 0.5);
            let g = estimate_green_from(&cube, &terminals, e.n_paths(), &p, 0.08).map_err(err)?;
            worst_z = worst_z.max(check_gaussian_domination(&two, 0.1, &p, &y, &g).z);
        }
    }

    let boxes: Vec<Domain> = [1.0, 2.0, 4.0].iter().map(|&l| builtin_domain(&format!("box({l},{l},{l})")).unwrap()).collect();
    let heat = CoefficientSchedule::heat();
    let c = Vec3::repeat(0.5);
    let m = Vec3::new(0.7, 0.5, 0.5);
    let mono = check_domain_monotonicity(&boxes, &heat, 0.0, &c, 0.1, &m, 0.08, &mc).map_err(err)?;
    let exact_mono = oracle_monotonicity(&[1.0, 2.0, 4.0], 1.0, 0.1, 0.0, &m, &c).map_err(err)?;

    let ok = ck < 1e-6 && tr.z.abs() <= 3.0 && worst_z <= 3.0 && mono.violations.is_empty() && exact_mono.violations.is_empty();
    Ok((
        ok,
        format!(
            "CK rel {ck:.1e}; time reversal z {:.2}; domination max z {worst_z:.1}; nested boxes {:?}",
            tr.z,
            mono.values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()
        ),
    ))
}

fn longtime() -> Outcome {
    let cube = polyhedron("cube");
    let heat = CoefficientSchedule::heat();
    let o = check_longtime_decay(&cube, &heat, LongtimeMode::Oracle, &McParams::default()).map_err(err)?;
    let mc = McParams {
        paths: 200_000,
        max_paths: 1_000_000,
        min_count: 200,
        dt: 0.005,
        seed: 7,
        bridge: true,
    };
    let m = check_longtime_decay(&cube, &heat, LongtimeMode::MonteCarlo, &mc).map_err(err)?;
    let (eo, em) = (o.rel_error.unwrap_or(f64::INFINITY), m.rel_error.unwrap_or(f64::INFINITY));
    Ok((
        eo <= 0.02 && em <= 0.10,
        format!(
            "3π² = {:.4}: oracle {:.4} ({:.1e} rel), MC {:.3} ± {:.3} ({:.2}% rel)",
            3.0 * PI * PI,
            o.rate,
            eo,
            m.rate,
            m.rate_stderr,
            100.0 * em
        ),
    ))
}

fn weight_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let samples = 10_000;
    let mut above = 0usize;
    let mut chord_fail = 0usize;
    let mut total = 0usize;
    let cones = [
        cone("octant"),
        cone("octant_complement"),
        PolyhedralCone::regular(3, 0.5).map_err(err)?,
        PolyhedralCone::regular(5, 1.1).map_err(err)?,
    ];
    for c in &cones {
        let d = Domain::Cone(c.clone());
        let mut n = 0;
        while n < samples {
            let x = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            if !c.contains(&x) {
                continue;
            }
            n += 1;
            let r = 10f64.powf(rng.random_range(-2.0..2.0));
            let p = WeightParams::uniform(&d, rng.random_range(0.1..4.0), rng.random_range(0.1..3.0)).map_err(err)?;
            if weight(&d, &p, &x, r).map_err(err)? > 1.0 {
                above += 1;
            }
            for (i, dir) in c.directions().iter().enumerate() {
                let de = c.dist_edge(i, &x).map_err(err)?;
                let chord = (x - x.norm() * dir).norm();
                if !(de <= chord * (1.0 + 1e-12) && chord <= 2.0 * de * (1.0 + 1e-12)) {
                    chord_fail += 1;
                }
            }
        }
        total += n;
    }
    let mut identity: f64 = 0.0;
    for name in ["cube", "tetrahedron", "octahedron", "box(2,1,1)"] {
        let poly = polyhedron(name);
        let d = Domain::Polyhedron(poly.clone());
        let (lo, hi) = poly.bounding_box();
        let mut n = 0;
        while n < samples {
            let x = Vec3::from_fn(|i, _| rng.random_range(lo[i]..hi[i]));
            if !poly.contains(&x) {
                continue;
            }
            n += 1;
            let r = 10f64.powf(rng.random_range(-2.0..1.0));
            let (lv, le) = (rng.random_range(0.1..3.0), rng.random_range(0.1..2.0));
            let p = WeightParams::uniform(&d, lv, le).map_err(err)?;
            if weight_poly(&poly, &p, &x, r).map_err(err)? > 1.0 {
                above += 1;
            }
            if n <= 100 {
                let diam = poly.diameter();
                let inf = weight_poly_inf(&poly, &p, &x).map_err(err)?;
                let scaled = diam.powf(lv * poly.vertices().len() as f64) * weight_poly(&poly, &p, &x, diam).map_err(err)?;
                identity = identity.max((inf - scaled).abs() / scaled);
            }
        }
        total += n;
    }
    Ok((
        above == 0 && chord_fail == 0 && identity <= 1e-12,
        format!("{total} samples: {above} with I > 1, {chord_fail} chord violations; I_inf identity rel {identity:.1e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("Platonic angles", platonic_table),
        ("eigenvalue oracles", eigenvalue_oracles),
        ("cap lower bounds", faber_krahn_chain),
        ("decay exponents", exponent_formulas),
        ("Monte Carlo vs exact kernels", mc_against_oracles),
        ("weighted bound stability", bound_check),
        ("kernel identities", identities),
        ("long-time decay", longtime),
        ("weight properties", weight_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

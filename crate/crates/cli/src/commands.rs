use std::fs;

use conekernel::exponents::{exponent_report, ExponentReport};
use conekernel::geometry::{load_domain, Domain, DomainSpec, Vec3};
use conekernel::oracles::OracleKernel;
use conekernel::plot::{bound_chart, decay_chart, heat_slice, longtime_chart};
use conekernel::sde_mc::{
    default_window, estimate_green_from, load_schedule, simulate_paths, CoefficientSchedule, EnsembleSummary, SdeError,
};
use conekernel::spectral::{first_eigenvalue, EigenOptions};
use conekernel::verify::{
    check_chapman_kolmogorov_mc, check_domain_monotonicity, check_gaussian_domination, check_longtime_decay,
    check_time_reversal, check_upper_bound, fit_decay, BoundGrid, Feature, LongtimeMode, McParams, VerifyError,
};
use conekernel::weights::{weight, WeightParams};
use serde::{Deserialize, Serialize};

use crate::output::Outputs;
use crate::{Cli, CliError, Command, LongtimeArg, McArgs, VerifyCommand};

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

/// Input-validation failures surfaced by the library are configuration
/// errors; everything else means the computation itself failed.
fn from_verify(e: VerifyError) -> CliError {
    match e {
        VerifyError::InadmissibleLambda(_) | VerifyError::BadFeature(_) | VerifyError::Unsupported(_) => config(e),
        VerifyError::Sde(ref s) if is_input_error(s) => config(e),
        _ => failed(e),
    }
}

fn from_sde(e: SdeError) -> CliError {
    if is_input_error(&e) {
        config(e)
    } else {
        failed(e)
    }
}

fn is_input_error(e: &SdeError) -> bool {
    !matches!(e, SdeError::EmptyWindowVolume)
}

fn domain(arg: &str) -> Result<(Domain, DomainSpec), CliError> {
    load_domain(arg).map_err(|e| config(format!("domain '{arg}': {e}")))
}

fn schedule(arg: &str) -> Result<CoefficientSchedule, CliError> {
    load_schedule(arg).map_err(|e| config(format!("schedule '{arg}': {e}")))
}

pub fn parse_vec3(what: &str, s: &str) -> Result<Vec3, CliError> {
    let v = parse_list(what, s)?;
    if v.len() != 3 {
        return Err(config(format!("{what}: expected 3 comma-separated numbers, got {}", v.len())));
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn parse_list(what: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| config(format!("{what}: '{p}': {e}"))))
        .collect()
}

/// Inline JSON when the argument starts with `{` or `[`, otherwise a file.
fn json_text(what: &str, arg: &str) -> Result<String, CliError> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| config(format!("{what}: cannot read '{arg}': {e}")))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| config(format!("{what}: field '{}': {}", e.path(), e.inner())))
}

fn lambda(domain: &Domain, arg: &str) -> Result<WeightParams, CliError> {
    let t = arg.trim_start();
    let params = if t.starts_with('{') || std::path::Path::new(arg).is_file() {
        parse_json("lambda", &json_text("lambda", arg)?)?
    } else {
        let v = parse_list("lambda", arg)?;
        if v.len() != 2 {
            return Err(config("lambda: expected JSON or 'vertex,edge'"));
        }
        WeightParams::uniform(domain, v[0], v[1]).map_err(config)?
    };
    params.validate(domain).map_err(|e| config(format!("lambda: {e}")))?;
    Ok(params)
}

fn mc_params(a: &McArgs) -> Result<McParams, CliError> {
    if a.paths == 0 || a.max_paths == 0 || !(a.dt > 0.0) {
        return Err(config("--paths, --max-paths and --dt must be positive"));
    }
    Ok(McParams {
        paths: a.paths,
        max_paths: a.max_paths.max(a.paths),
        min_count: a.min_count,
        dt: a.dt,
        seed: a.seed,
        bridge: !a.no_bridge,
    })
}

fn finish(out: &Outputs, passed: bool) -> Result<bool, CliError> {
    for p in out.written() {
        println!("wrote {}", p.display());
    }
    if !passed {
        println!("FAILED");
    }
    Ok(passed)
}

pub fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Exponents {
            domain: d,
            nu1,
            nu2,
            heat,
            tol,
        } => exponents(cli, d, *nu1, *nu2, *heat, *tol),
        Command::Eigenvalue { domain: d, tol } => eigenvalue(cli, d, *tol),
        Command::Weights {
            domain: d,
            lambda: l,
            grid,
            r,
        } => weights(cli, d, l, *grid, *r),
        Command::Simulate {
            domain: d,
            schedule: s,
            from,
            to,
            paths,
            dt,
            seed,
            bridge: _,
            no_bridge,
        } => simulate(cli, d, s, from, *to, *paths, *dt, *seed, !*no_bridge),
        Command::Green { ensemble, at, window } => green(cli, ensemble, at, *window),
        Command::Oracle {
            kind,
            params,
            c,
            t,
            s,
            y,
            x0,
            x1,
            grid,
            tol,
        } => oracle(cli, kind, params, *c, *t, *s, y, x0, x1, *grid, *tol),
        Command::Verify { check } => verify(cli, check),
    }
}

#[derive(Serialize)]
struct ExponentRow {
    kind: &'static str,
    index: usize,
    angle: f64,
    exact_plus: f64,
    exact_minus: f64,
    lower_plus: f64,
    lower_minus: f64,
    range_upper_plus: f64,
    range_upper_minus: f64,
    eigenvalue: Option<f64>,
    eigenvalue_error: Option<f64>,
}

fn exponent_rows(r: &ExponentReport) -> Vec<ExponentRow> {
    let mut rows: Vec<ExponentRow> = r
        .vertices
        .iter()
        .map(|v| ExponentRow {
            kind: "vertex",
            index: v.vertex,
            angle: v.solid_angle,
            exact_plus: v.exact.plus,
            exact_minus: v.exact.minus,
            lower_plus: v.lower.plus,
            lower_minus: v.lower.minus,
            range_upper_plus: v.range_upper.plus,
            range_upper_minus: v.range_upper.minus,
            eigenvalue: Some(v.e0),
            eigenvalue_error: Some(v.e0_error),
        })
        .collect();
    rows.extend(r.edges.iter().map(|e| ExponentRow {
        kind: "edge",
        index: e.edge,
        angle: e.kappa,
        exact_plus: e.exact.plus,
        exact_minus: e.exact.minus,
        lower_plus: e.lower.plus,
        lower_minus: e.lower.minus,
        range_upper_plus: e.range_upper.plus,
        range_upper_minus: e.range_upper.minus,
        eigenvalue: None,
        eigenvalue_error: None,
    }));
    rows
}

fn exponents(cli: &Cli, d: &str, nu1: f64, nu2: f64, heat: bool, tol: f64) -> Result<bool, CliError> {
    let (dom, _) = domain(d)?;
    let opts = EigenOptions {
        tol,
        ..EigenOptions::default()
    };
    let report = exponent_report(&dom, nu1, nu2, heat, &opts).map_err(config)?;
    println!("{}: {} vertices, {} edges (nu1 = {nu1}, nu2 = {nu2})", report.domain, report.vertices.len(), report.edges.len());
    for v in &report.vertices {
        println!(
            "  vertex {}: E0 = {:.6} ± {:.1e}, exponent {:.6}, range (0, {:.6})",
            v.vertex, v.e0, v.e0_error, v.exact.plus, v.range_upper.plus
        );
    }
    for e in &report.edges {
        println!("  edge {}: kappa = {:.6}, exponent {:.6}, range (0, {:.6})", e.edge, e.kappa, e.exact.plus, e.range_upper.plus);
    }
    let mut out = Outputs::new(&cli.out, "exponents")?;
    out.json("exponents", &report, None)?;
    out.csv("", exponent_rows(&report))?;
    finish(&out, true)
}

fn eigenvalue(cli: &Cli, d: &str, tol: f64) -> Result<bool, CliError> {
    let (dom, _) = domain(d)?;
    let Domain::Cone(cone) = dom else {
        return Err(config("eigenvalue needs a cone domain"));
    };
    if !(tol > 0.0) {
        return Err(config("--tol must be positive"));
    }
    let opts = EigenOptions {
        tol,
        ..EigenOptions::default()
    };
    let r = first_eigenvalue(&cone, &opts).map_err(failed)?;
    println!(
        "E0 = {:.8} (error indicator {:.2e}, {} levels, converged: {})",
        r.value, r.error_indicator, r.levels_used, r.converged
    );
    let mut out = Outputs::new(&cli.out, "eigenvalue")?;
    out.json("eigenvalue", &r, None)?;
    out.csv("", r.history.iter())?;
    finish(&out, true)
}

#[derive(Serialize)]
struct WeightRow {
    x: f64,
    y: f64,
    z: f64,
    weight: f64,
}

fn weights(cli: &Cli, d: &str, l: &str, n: usize, r: f64) -> Result<bool, CliError> {
    let (dom, _) = domain(d)?;
    let params = lambda(&dom, l)?;
    if n < 2 || !(r > 0.0) {
        return Err(config("--grid must be at least 2 and --r positive"));
    }
    let (lo, hi, mid_z) = match &dom {
        Domain::Cone(c) => (Vec3::repeat(-1.5 * r), Vec3::repeat(1.5 * r), (c.interior_direction() * r).z),
        Domain::Polyhedron(p) => {
            let (lo, hi) = p.bounding_box();
            (lo, hi, p.centroid().z)
        }
        other => return Err(config(format!("weights are defined on cones and polyhedrons, not {}", other.name()))),
    };
    let at = |i: usize, k: usize| lo[k] + (hi[k] - lo[k]) * (i as f64 + 0.5) / n as f64;
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = Vec3::new(at(i, 0), at(j, 1), at(k, 2));
                if dom.contains(&x) {
                    let w = weight(&dom, &params, &x, r).map_err(failed)?;
                    rows.push(WeightRow {
                        x: x.x,
                        y: x.y,
                        z: x.z,
                        weight: w,
                    });
                }
            }
        }
    }
    let slice: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let x = Vec3::new(at(i, 0), at(j, 1), mid_z);
                    if dom.contains(&x) {
                        weight(&dom, &params, &x, r).unwrap_or(f64::NAN)
                    } else {
                        f64::NAN
                    }
                })
                .collect()
        })
        .collect();
    let max = rows.iter().map(|w| w.weight).fold(0.0, f64::max);
    println!("{} interior grid points, max weight {max:.6}", rows.len());
    let mut out = Outputs::new(&cli.out, "weights")?;
    out.csv("", rows)?;
    out.svg(
        "",
        &heat_slice(&format!("weight on z = {mid_z:.3} (r = {r})"), (lo.x, hi.x), (lo.y, hi.y), &slice),
    )?;
    finish(&out, max <= 1.0)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    cli: &Cli,
    d: &str,
    s_arg: &str,
    from: &str,
    t: f64,
    n: usize,
    dt: f64,
    seed: u64,
    bridge: bool,
) -> Result<bool, CliError> {
    let (dom, spec) = domain(d)?;
    let sch = schedule(s_arg)?;
    let v = parse_list("from", from)?;
    if v.len() != 4 {
        return Err(config("--from: expected s,y1,y2,y3"));
    }
    let y = Vec3::new(v[1], v[2], v[3]);
    println!("seed {seed}");
    let ens = simulate_paths(&dom, &sch, v[0], &y, t, dt, n, seed, bridge).map_err(from_sde)?;
    let summary = ens.summary(spec, sch.to_spec());
    println!(
        "{} of {} paths survived: P = {:.6} ± {:.2e}",
        summary.survivors, summary.n_paths, summary.survival, summary.survival_stderr
    );
    let mut out = Outputs::new(&cli.out, "ensemble")?;
    out.json("ensemble", &summary, None)?;
    finish(&out, true)
}

fn green(cli: &Cli, path: &std::path::Path, at: &str, window: Option<f64>) -> Result<bool, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config(format!("cannot read '{}': {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| config(format!("ensemble '{}': {e}", path.display())))?;
    // Accept both the bare summary and the report envelope written by `simulate`.
    let body = value.get("result").cloned().unwrap_or(value);
    let summary: EnsembleSummary = parse_json("ensemble", &body.to_string())?;
    let dom = summary.domain.build().map_err(|e| config(format!("ensemble domain: {e}")))?;
    let sch = CoefficientSchedule::from_spec(&summary.schedule).map_err(|e| config(format!("ensemble schedule: {e}")))?;
    let x = parse_vec3("at", at)?;
    let h = window.unwrap_or_else(|| default_window(&dom, &sch, summary.meta.s, summary.meta.t, &x));
    let terminals: Vec<Vec3> = summary.terminals.iter().map(|p| Vec3::from(*p)).collect();
    let est = estimate_green_from(&dom, &terminals, summary.n_paths, &x, h).map_err(from_sde)?;
    println!("G = {:.6e} ± {:.2e} (window {h:.4}, {} hits of {} paths)", est.value, est.stderr, est.count, summary.n_paths);
    let mut out = Outputs::new(&cli.out, "green")?;
    out.json("green", &est, None)?;
    finish(&out, true)
}

#[derive(Serialize)]
struct OracleRow {
    x: f64,
    y: f64,
    z: f64,
    value: f64,
    tolerance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrthantParams {
    m: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WedgeParams {
    kappa: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxParams {
    lengths: [f64; 3],
}

/// Kernel from `--kind` and `--params`, parsed per kind so errors name the field.
fn oracle_kernel(kind: &str, params: &str) -> Result<OracleKernel, CliError> {
    Ok(match kind {
        "free" => parse_json::<NoParams>("params", params).map(|_| OracleKernel::Free)?,
        "half_space" => parse_json::<NoParams>("params", params).map(|_| OracleKernel::HalfSpace)?,
        "orthant_wedge" => OracleKernel::OrthantWedge {
            m: parse_json::<OrthantParams>("params", params)?.m,
        },
        "general_wedge" => OracleKernel::GeneralWedge {
            kappa: parse_json::<WedgeParams>("params", params)?.kappa,
        },
        "box" => OracleKernel::Box {
            lengths: parse_json::<BoxParams>("params", params)?.lengths,
        },
        other => {
            return Err(config(format!(
                "unknown oracle kind '{other}' (expected free, half_space, orthant_wedge, general_wedge or box)"
            )))
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    cli: &Cli,
    kind: &str,
    params: &str,
    c: f64,
    t: f64,
    s: f64,
    y: &str,
    x0: &str,
    x1: &str,
    n: usize,
    tol: f64,
) -> Result<bool, CliError> {
    let kernel = oracle_kernel(kind, &json_text("params", params)?)?;
    let y = parse_vec3("y", y)?;
    let (a, b) = (parse_vec3("x0", x0)?, parse_vec3("x1", x1)?);
    if n < 1 {
        return Err(config("--grid must be at least 1"));
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        let x = a + f * (b - a);
        let value = if kernel.contains_closed(&x) && kernel.contains_closed(&y) {
            kernel.eval(c, t, s, &x, &y, tol).map_err(config)?
        } else {
            0.0
        };
        rows.push(OracleRow {
            x: x.x,
            y: x.y,
            z: x.z,
            value,
            tolerance: tol,
        });
    }
    println!("{n} values of the {kind} kernel written");
    let mut out = Outputs::new(&cli.out, "oracle")?;
    out.csv("", rows)?;
    finish(&out, true)
}

fn verify(cli: &Cli, check: &VerifyCommand) -> Result<bool, CliError> {
    match check {
        VerifyCommand::Bound {
            target,
            lambda: lp,
            lambda_minus,
            grid,
            mc,
        } => {
            let (dom, _) = domain(&target.domain)?;
            let sch = schedule(&target.schedule)?;
            let plus = lambda(&dom, lp)?;
            let minus = match lambda_minus {
                Some(l) => lambda(&dom, l)?,
                None => plus.clone(),
            };
            let grid = match grid {
                Some(g) => parse_json("grid", &json_text("grid", g)?)?,
                None => default_grid(&dom)?,
            };
            let mc = mc_params(mc)?;
            println!("seed {}", mc.seed);
            let r = check_upper_bound(&dom, &sch, &plus, &minus, &grid, &mc).map_err(from_verify)?;
            println!("sigma = {:.4} (fit {:?}), sup ratio {:.4e}, {} paths", r.sigma, r.sigma_fit, r.sup_ratio, r.total_paths);
            for f in &r.features {
                println!(
                    "  {}: growth {:.3} over two refinements{}",
                    f.feature,
                    f.growth,
                    if f.divergent { "  DIVERGENT" } else { "" }
                );
            }
            let mut out = Outputs::new(&cli.out, "bound")?;
            out.json("bound", &r, Some(!r.divergent))?;
            out.csv("", r.cells.iter().map(BoundRow::from))?;
            out.svg("", &bound_chart(&r).to_svg())?;
            finish(&out, !r.divergent)
        }
        VerifyCommand::Decay {
            target,
            feature,
            t,
            r,
            tolerance,
            mc,
        } => {
            let (dom, _) = domain(&target.domain)?;
            let sch = schedule(&target.schedule)?;
            let feature: Feature = feature.parse().map_err(|e| config(format!("feature: {e}")))?;
            let mc = mc_params(mc)?;
            println!("seed {}", mc.seed);
            let fit = fit_decay(&dom, &sch, feature, *t, *r, &mc).map_err(from_verify)?;
            let passed = fit
                .reference
                .is_none_or(|e| (fit.ci.0 <= e && e <= fit.ci.1) || (fit.exponent - e).abs() <= *tolerance);
            println!(
                "{feature}: exponent {:.4} ± {:.4}, interval ({:.4}, {:.4}), reference {:?}",
                fit.exponent, fit.stderr, fit.ci.0, fit.ci.1, fit.reference
            );
            let mut out = Outputs::new(&cli.out, "decay")?;
            out.json("decay", &fit, Some(passed))?;
            out.csv("", fit.points.iter().map(DecayRow::from))?;
            out.svg("", &decay_chart(&fit).to_svg())?;
            finish(&out, passed)
        }
        VerifyCommand::Identities {
            target,
            x,
            y,
            s,
            t,
            h,
            nested,
            mc,
        } => identities(cli, target, x, y, *s, *t, *h, nested, mc),
        VerifyCommand::Longtime {
            target,
            mode,
            tolerance,
            mc,
        } => {
            let (dom, _) = domain(&target.domain)?;
            let Domain::Polyhedron(poly) = dom else {
                return Err(config("long-time decay needs a bounded polyhedron"));
            };
            let sch = schedule(&target.schedule)?;
            let mc = mc_params(mc)?;
            let (mode, tol) = match mode {
                LongtimeArg::Oracle => (LongtimeMode::Oracle, tolerance.unwrap_or(0.02)),
                LongtimeArg::Mc => (LongtimeMode::MonteCarlo, tolerance.unwrap_or(0.10)),
            };
            let r = check_longtime_decay(&poly, &sch, mode, &mc).map_err(from_verify)?;
            let passed = r.within_bracket && r.rel_error.is_none_or(|e| e <= tol);
            println!(
                "rate {:.5} ± {:.2e}, reference {:?}, relative error {:?}, bracket ({:.4}, {:.4})",
                r.rate, r.rate_stderr, r.reference, r.rel_error, r.bracket.0, r.bracket.1
            );
            let mut out = Outputs::new(&cli.out, "longtime")?;
            out.json("longtime", &r, Some(passed))?;
            out.csv(
                "",
                r.times.iter().zip(&r.values).zip(&r.stderrs).map(|((&t, &value), &stderr)| SeriesRow { t, value, stderr }),
            )?;
            out.svg("", &longtime_chart(&r).to_svg())?;
            finish(&out, passed)
        }
    }
}

fn default_grid(dom: &Domain) -> Result<BoundGrid, CliError> {
    match dom {
        Domain::Cone(c) => {
            let d = c.interior_direction();
            Ok(BoundGrid {
                times: vec![1.0],
                targets: vec![(d * 1.2).into(), (d * 2.0).into()],
                features: vec![Feature::Vertex(0), Feature::Edge(0), Feature::Face(0)],
                start_distance: 1.0,
                levels: 3,
            })
        }
        Domain::Polyhedron(p) => {
            let l = 0.25 * p.diameter();
            Ok(BoundGrid {
                times: vec![l * l],
                targets: vec![p.centroid().into()],
                features: vec![Feature::Vertex(0), Feature::Edge(0), Feature::Face(0)],
                start_distance: l,
                levels: 3,
            })
        }
        other => Err(config(format!("the bound check needs a cone or polyhedron, not {}", other.name()))),
    }
}

#[derive(Serialize)]
struct BoundRow {
    feature: String,
    level: usize,
    distance: f64,
    tau: f64,
    y1: f64,
    y2: f64,
    y3: f64,
    green: f64,
    green_stderr: f64,
    count: usize,
    weight_x: f64,
    weight_y: f64,
    ratio: f64,
    ratio_stderr: f64,
}

impl From<&conekernel::verify::BoundCell> for BoundRow {
    fn from(c: &conekernel::verify::BoundCell) -> Self {
        BoundRow {
            feature: c.feature.to_string(),
            level: c.level,
            distance: c.distance,
            tau: c.tau,
            y1: c.y[0],
            y2: c.y[1],
            y3: c.y[2],
            green: c.green,
            green_stderr: c.green_stderr,
            count: c.count,
            weight_x: c.weight_x,
            weight_y: c.weight_y,
            ratio: c.ratio,
            ratio_stderr: c.ratio_stderr,
        }
    }
}

#[derive(Serialize)]
struct DecayRow {
    distance: f64,
    value: f64,
    stderr: f64,
    count: usize,
    paths: usize,
    used: bool,
}

impl From<&conekernel::verify::DecayPoint> for DecayRow {
    fn from(p: &conekernel::verify::DecayPoint) -> Self {
        DecayRow {
            distance: p.distance,
            value: p.value,
            stderr: p.stderr,
            count: p.count,
            paths: p.paths,
            used: p.used,
        }
    }
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    value: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct IdentityRow {
    check: &'static str,
    first: f64,
    first_stderr: f64,
    second: f64,
    second_stderr: f64,
    z: f64,
    passed: bool,
}

#[derive(Serialize)]
struct IdentitiesReport {
    time_reversal: conekernel::verify::McComparison,
    chapman_kolmogorov: conekernel::verify::McComparison,
    gaussian_domination: conekernel::verify::DominationCheck,
    monotonicity: Option<conekernel::verify::MonotonicityReport>,
}

#[allow(clippy::too_many_arguments)]
fn identities(
    cli: &Cli,
    target: &crate::DomainArgs,
    x: &str,
    y: &str,
    s: f64,
    t: f64,
    h: f64,
    nested: &[String],
    mc: &McArgs,
) -> Result<bool, CliError> {
    let (dom, _) = domain(&target.domain)?;
    let sch = schedule(&target.schedule)?;
    let (x, y) = (parse_vec3("x", x)?, parse_vec3("y", y)?);
    if !(s < t) || !(h > 0.0) {
        return Err(config("need s < t and h > 0"));
    }
    let mc = mc_params(mc)?;
    println!("seed {}", mc.seed);
    let tr = check_time_reversal(&dom, &sch, s, &y, t, &x, h, &mc).map_err(from_verify)?;
    let r = 0.5 * (s + t);
    let ck = check_chapman_kolmogorov_mc(&dom, &sch, t, r, s, &x, &y, h, mc.max_paths.min(400_000), &mc).map_err(from_verify)?;
    let ens = simulate_paths(&dom, &sch, s, &y, t, mc.dt.min(t - s), mc.max_paths, mc.seed, mc.bridge).map_err(from_sde)?;
    let terminals: Vec<Vec3> = ens.survivors().collect();
    let est = estimate_green_from(&dom, &terminals, ens.n_paths(), &x, h).map_err(from_sde)?;
    let dom_check = check_gaussian_domination(&sch, t - s, &x, &y, &est);
    let mono = if nested.len() >= 2 {
        let doms = nested.iter().map(|d| domain(d).map(|p| p.0)).collect::<Result<Vec<_>, _>>()?;
        Some(check_domain_monotonicity(&doms, &sch, s, &y, t, &x, h, &mc).map_err(from_verify)?)
    } else {
        None
    };
    let pass_tr = tr.z.abs() <= 3.0;
    let pass_ck = ck.z.abs() <= 3.0;
    let pass_mono = mono.as_ref().is_none_or(|m| m.violations.is_empty());
    let passed = pass_tr && pass_ck && !dom_check.violated && pass_mono;
    println!("time reversal: {:.5e} vs {:.5e}, z = {:.2}", tr.first, tr.second, tr.z);
    println!("Chapman-Kolmogorov: {:.5e} vs {:.5e}, z = {:.2}", ck.first, ck.second, ck.z);
    println!(
        "Gaussian domination: {:.5e} ± {:.1e} vs bound {:.5e}{}",
        dom_check.estimate,
        dom_check.stderr,
        dom_check.bound,
        if dom_check.violated { "  VIOLATED" } else { "" }
    );
    if let Some(m) = &mono {
        println!("monotonicity: {:?}, violations {:?}", m.values, m.violations);
    }
    let rows = vec![
        IdentityRow {
            check: "time_reversal",
            first: tr.first,
            first_stderr: tr.first_stderr,
            second: tr.second,
            second_stderr: tr.second_stderr,
            z: tr.z,
            passed: pass_tr,
        },
        IdentityRow {
            check: "chapman_kolmogorov",
            first: ck.first,
            first_stderr: ck.first_stderr,
            second: ck.second,
            second_stderr: ck.second_stderr,
            z: ck.z,
            passed: pass_ck,
        },
        IdentityRow {
            check: "gaussian_domination",
            first: dom_check.estimate,
            first_stderr: dom_check.stderr,
            second: dom_check.bound,
            second_stderr: 0.0,
            z: dom_check.z,
            passed: !dom_check.violated,
        },
    ];
    let report = IdentitiesReport {
        time_reversal: tr,
        chapman_kolmogorov: ck,
        gaussian_domination: dom_check,
        monotonicity: mono,
    };
    let mut out = Outputs::new(&cli.out, "identities")?;
    out.json("identities", &report, Some(passed))?;
    out.csv("", rows)?;
    finish(&out, passed)
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Weighted Green's function estimates on polyhedral cones and polyhedrons.
#[derive(Parser, Debug)]
#[command(name = "conekernel", version)]
pub struct Cli {
    /// Worker threads for Monte Carlo batches and mesh assembly (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory, or the path of the JSON report.
    #[arg(long, global = true, env = "CONEKERNEL_OUT", default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Critical exponents of every vertex and edge, and their admissible ranges.
    Exponents {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 1.0)]
        nu1: f64,
        #[arg(long, default_value_t = 1.0)]
        nu2: f64,
        /// Use the exact heat-operator values for the ranges.
        #[arg(long)]
        heat: bool,
        /// Relative refinement tolerance of the eigenvalue solver.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// First Dirichlet eigenvalue of the cone's spherical polygon.
    Eigenvalue {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Weight function on a grid, as CSV plus a heat slice.
    Weights {
        #[arg(long)]
        domain: String,
        /// JSON parameters (inline or file) or `vertex,edge` for uniform exponents.
        #[arg(long)]
        lambda: String,
        /// Points per axis.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Scale `r` of the weight.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Killed-diffusion ensemble; writes a summary with the surviving terminals.
    Simulate {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value = "builtin:heat")]
        schedule: String,
        /// Start as `s,y1,y2,y3`.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Brownian-bridge crossing correction (on by default).
        #[arg(long, overrides_with = "no_bridge")]
        bridge: bool,
        #[arg(long)]
        no_bridge: bool,
    },
    /// Window estimate of the Green's function from an ensemble summary.
    Green {
        #[arg(long)]
        ensemble: PathBuf,
        /// Evaluation point `x1,x2,x3`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Window radius (default: the automatic window).
        #[arg(long)]
        window: Option<f64>,
    },
    /// Exact kernels evaluated along a segment.
    Oracle {
        /// free, half_space, orthant_wedge, general_wedge or box.
        #[arg(long)]
        kind: String,
        /// Kernel parameters as a JSON object, e.g. `{"m":2}` or `{"lengths":[1,1,1]}`.
        #[arg(long, default_value = "{}")]
        params: String,
        /// Diffusivity `c` of `a = c I`.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// Segment start `x` and end, `x1,x2,x3`.
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, allow_hyphen_values = true)]
        x1: String,
        #[arg(long, default_value_t = 51)]
        grid: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Numerical checks; exit status 1 when a check fails.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 2_000_000)]
    pub max_paths: usize,
    #[arg(long, default_value_t = 200)]
    pub min_count: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Disable the Brownian-bridge crossing correction.
    #[arg(long)]
    pub no_bridge: bool,
}

#[derive(Args, Debug, Clone)]
pub struct DomainArgs {
    #[arg(long)]
    pub domain: String,
    #[arg(long, default_value = "builtin:heat")]
    pub schedule: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LongtimeArg {
    Oracle,
    Mc,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Weighted upper bound: ratio stability under refinement toward features.
    Bound {
        #[command(flatten)]
        target: DomainArgs,
        /// `Λ⁺` (JSON or `vertex,edge`).
        #[arg(long)]
        lambda: String,
        /// `Λ⁻`; defaults to `Λ⁺`.
        #[arg(long)]
        lambda_minus: Option<String>,
        /// Grid as JSON (inline or file); a default grid is derived from the domain.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Decay exponent of the survival probability toward a feature.
    Decay {
        #[command(flatten)]
        target: DomainArgs,
        /// `vertex:i`, `edge:i` or `face:i`.
        #[arg(long, default_value = "vertex:0")]
        feature: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Largest approach distance.
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        /// Accepted distance from the reference exponent when it lies outside the interval.
        #[arg(long, default_value_t = 0.2)]
        tolerance: f64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Time reversal, Chapman–Kolmogorov, Gaussian domination and monotonicity.
    Identities {
        #[command(flatten)]
        target: DomainArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, default_value_t = -0.05, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
        t: f64,
        /// Window radius.
        #[arg(long, default_value_t = 0.08)]
        h: f64,
        /// Nested domains, innermost first, for the monotonicity check (repeatable).
        #[arg(long)]
        nested: Vec<String>,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Long-time exponential decay rate in a bounded polyhedron.
    Longtime {
        #[command(flatten)]
        target: DomainArgs,
        #[arg(long, value_enum, default_value = "oracle")]
        mode: LongtimeArg,
        /// Accepted relative error against the box eigenvalue.
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        mc: McArgs,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs (exit 2).
    Config(String),
    /// A computation failed or a check did not pass (exit 1).
    Failed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("configuration error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Config(_) => 2,
                CliError::Failed(_) => 1,
            })
        }
    }
}

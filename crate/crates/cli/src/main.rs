//! `eigenbound`: evaluate gradient bounds, solve model eigenproblems,
//! simulate first-passage times and run verification configs.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage or config error,
//! 3 numerical failure or inconsistent curvature data.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eigenbound::bounds::{
    best_dirichlet_upper_bound, dirichlet_lower_bound, dirichlet_upper_bound, dirichlet_upper_bounds, c1_c2_from_lambda1,
    GeometryParams, UpperVariant,
};
use eigenbound::eigensolver::{boundary_gradient, gradient_ratio, solve};
use eigenbound::mc::{simulate_fpt, MCConfig};
use eigenbound::eigensolver::BoundaryCondition;
use eigenbound::verify::{modes_tsv, run_verify_config, VerificationReport, VerifyConfig};
use eigenbound::Error;

#[derive(Parser)]
#[command(name = "eigenbound", version, about = "Gradient bounds for Dirichlet and Neumann eigenfunctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print lower and upper ratio bounds for the given curvature constants.
    Bounds(BoundsArgs),
    /// Solve the eigenproblem described by a config file.
    Solve(SolveArgs),
    /// Exact and Monte-Carlo first-passage probability of ε + b_t + αt.
    Fpt(FptArgs),
    /// Run a verification config and write report files.
    Verify(VerifyArgs),
    /// Summarise an existing report.json.
    Report(ReportArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("eigenvalue").required(true).multiple(true))]
struct BoundsArgs {
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Effective dimension (defaults to d).
    #[arg(long)]
    n: Option<f64>,
    /// CD(-K, n) constant.
    #[arg(long = "K", default_value_t = 0.0)]
    k: f64,
    /// Bakry-Emery constant: Ric - Hess V >= -K_V.
    #[arg(long = "K_V", default_value_t = 0.0, allow_hyphen_values = true)]
    k_v: f64,
    /// Upper bound of ½Lρ off the cut locus.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "alpha0")]
    alpha: Option<f64>,
    /// α₀ for the constants c₁, c₂ (used as α elsewhere).
    #[arg(long, allow_hyphen_values = true)]
    alpha0: Option<f64>,
    #[arg(long, group = "eigenvalue")]
    lambda: Option<f64>,
    /// First eigenvalue, for c₁ and c₂.
    #[arg(long, group = "eigenvalue")]
    lambda1: Option<f64>,
    /// Restrict to one upper-bound variant.
    #[arg(long, value_parser = parse_variant)]
    variant: Option<UpperVariant>,
}

fn parse_variant(s: &str) -> Result<UpperVariant, String> {
    UpperVariant::parse(s).ok_or_else(|| {
        let names: Vec<_> = UpperVariant::ALL.iter().map(|v| v.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Args)]
struct Overrides {
    /// Grid nodes.
    #[arg(long)]
    grid: Option<usize>,
    /// Number of eigenpairs.
    #[arg(long)]
    modes: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Write modes.tsv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FptArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    eps: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time step (default t/200).
    #[arg(long)]
    dt: Option<f64>,
    /// Disable the Brownian-bridge crossing test.
    #[arg(long)]
    no_bridge: bool,
}

#[derive(Args)]
struct VerifyArgs {
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    report: PathBuf,
    /// Regenerate report.csv and sandwich.tsv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => bounds(&a),
        Command::Solve(a) => solve_cmd(&a),
        Command::Fpt(a) => fpt(&a),
        Command::Verify(a) => verify(&a),
        Command::Report(a) => report(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn bounds(a: &BoundsArgs) -> Result<u8, Error> {
    let g = GeometryParams {
        d: a.d,
        n: a.n.unwrap_or(a.d as f64),
        k: a.k,
        k_v: a.k_v,
        theta: 0.0,
        delta: 0.0,
        alpha: a.alpha.or(a.alpha0).unwrap_or(0.0),
    };
    g.validate()?;
    if let Some(lambda) = a.lambda {
        println!("lower {:.6}", dirichlet_lower_bound(&g, lambda)?);
        let sets = match a.variant {
            Some(v) => vec![dirichlet_upper_bound(&g, lambda, v)?],
            None => dirichlet_upper_bounds(&g, lambda)?,
        };
        for s in &sets {
            let note = if s.variant == UpperVariant::SimplifiedPos { " (not used in min)" } else { "" };
            println!(
                "upper {:<15} {:.6} branch={:?}{note}",
                s.variant.name(),
                s.upper,
                s.branch
            );
        }
        let best = match a.variant {
            Some(_) => sets[0],
            None => best_dirichlet_upper_bound(&g, lambda)?,
        };
        println!("min {:.6} ({})", best.upper, best.variant.name());
    }
    if let Some(l1) = a.lambda1 {
        let (c1, c2) = c1_c2_from_lambda1(&g, l1)?;
        println!("c1 {c1:.6}");
        println!("c2 {c2:.6}");
    }
    Ok(0)
}

fn load_config(path: &Path, o: &Overrides) -> Result<VerifyConfig, Error> {
    let mut cfg = VerifyConfig::load(path)?;
    if let Some(g) = o.grid {
        cfg.domain.nodes = Some(g);
    }
    if let Some(m) = o.modes {
        cfg.modes = m;
    }
    Ok(cfg)
}

fn solve_cmd(a: &SolveArgs) -> Result<u8, Error> {
    let cfg = load_config(&a.config, &a.overrides)?;
    let (spec, _) = cfg.build_domain()?;
    let bc = match cfg.boundary.as_str() {
        _ if !spec.has_boundary() => BoundaryCondition::Neumann,
        "neumann" => BoundaryCondition::Neumann,
        "dirichlet" => BoundaryCondition::Dirichlet,
        other => return Err(Error::Config(format!("unknown boundary condition `{other}`"))),
    };
    let modes = solve(&spec, bc, cfg.modes)?;
    println!("{:>3} {:>16} {:>16} {:>12} {:>12}", "k", "lambda", "lambda_discrete", "ratio", "boundary");
    for (i, ep) in modes.iter().enumerate() {
        let bg = boundary_gradient(ep, &spec).map_or("-".to_string(), |v| format!("{v:.8}"));
        println!(
            "{:>3} {:>16.10} {:>16.10} {:>12.8} {:>12}",
            i + 1,
            ep.lambda,
            ep.lambda_discrete,
            gradient_ratio(ep),
            bg
        );
    }
    if let Some(dir) = &a.out {
        let io = |e: std::io::Error| Error::Config(format!("cannot write to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("modes.tsv"), modes_tsv(&modes)).map_err(io)?;
    }
    Ok(0)
}

fn fpt(a: &FptArgs) -> Result<u8, Error> {
    let cfg = MCConfig::new(a.paths, a.seed)
        .with_bridge(!a.no_bridge)
        .with_dt(a.dt.unwrap_or(a.t / 200.0));
    let r = simulate_fpt(a.alpha, a.eps, a.t, &cfg)?;
    println!("exact    {:.8}", r.exact);
    println!("estimate {:.8}", r.estimate);
    println!("stderr   {:.8}", r.stderr);
    println!("z        {:+.4}", r.z_score);
    println!("paths    {}", r.n_paths);
    Ok(0)
}

fn verify(a: &VerifyArgs) -> Result<u8, Error> {
    let mut cfg = load_config(&a.config, &a.overrides)?;
    if let Some(mc) = cfg.mc.as_mut() {
        if let Some(s) = a.seed {
            mc.seed = s;
        }
        if let Some(p) = a.paths {
            mc.paths = p;
        }
    }
    let v = run_verify_config(&cfg)?;
    v.write(&a.out)?;
    print!("{}", v.report.render());
    Ok(v.report.exit_code() as u8)
}

fn report(a: &ReportArgs) -> Result<u8, Error> {
    let text = std::fs::read_to_string(&a.report)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", a.report.display())))?;
    let r = VerificationReport::from_json(&text)?;
    if let Some(dir) = &a.out {
        let io = |e: std::io::Error| Error::Config(e.to_string());
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("report.csv"), r.to_csv()).map_err(io)?;
        std::fs::write(dir.join("sandwich.tsv"), r.sandwich_tsv()).map_err(io)?;
    }
    print!("{}", r.render());
    Ok(r.exit_code() as u8)
}

//! Command-line front end: simulation, bound tables, Doob constants, the
//! two-martingale comparison and the pathwise verifier.

mod io;
mod parse;

use clap::{Args, Parser, Subcommand};
use maxbound::boundary::{BoundaryFn, BoundaryVector, StoppingBoundaryVector};
use maxbound::bounds::{
    compare_orderings, empirical_max_functional, optimize_zeta_vector, ub_at_level, ub_functional,
    zero_tail_level, CompareConfig, QuadratureGrid, TailRule, UbOptions, ZetaFamily,
};
use maxbound::doob::{
    doob_l1_classical, doob_l1_refined, doob_lp_classical, doob_lp_refined, doob_small_p,
    improved_l1, MomentSummary,
};
use maxbound::embedding::{exact_ensemble, walk_ensemble};
use maxbound::pathwise::verify_inequality;
use maxbound::phi::PhiSpec;
use maxbound::stats::mean_stderr;
use maxbound::types::MonteCarloEnsemble;
use std::path::PathBuf;

use io::fmt;

#[derive(Parser)]
#[command(name = "maxbound", version, about = "Martingale maximum bounds toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an ensemble stopped on the given per-stage boundaries.
    Simulate(SimulateArgs),
    /// Upper-bound table for an ensemble, a boundary vector and a payoff.
    Bound(BoundArgs),
    /// Doob-type constants from an ensemble or analytic moments.
    Doob(DoobArgs),
    /// Two-martingale ordering comparison for a pair of boundary vectors.
    Compare(CompareArgs),
    /// Optimize a linear boundary family against an ensemble.
    Optimize(OptimizeArgs),
    /// Check the pathwise inequality on every (path, level) pair.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Stage stopping boundary, repeatable (one per stage).
    #[arg(long = "boundary", required = true)]
    boundaries: Vec<String>,
    /// Repeat a single boundary over this many stages.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the random-walk oracle sampler instead of the exact one.
    #[arg(long)]
    walk: bool,
    /// Walk step size (walk sampler only).
    #[arg(long)]
    dt: Option<f64>,
    /// Per-path step budget (walk sampler only).
    #[arg(long, default_value_t = 100_000_000)]
    step_cap: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    ensemble: PathBuf,
    /// Stage boundary of the bound, repeatable (one per stage).
    #[arg(long = "zeta", required = true)]
    zetas: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "identity")]
    phi: String,
    #[arg(long, default_value_t = 512)]
    levels: usize,
    /// Level-grid end; defaults to the smallest level past every sample.
    #[arg(long)]
    m_max: Option<f64>,
    /// Truncation accounting: `zero` or `analytic:<alpha>`.
    #[arg(long, default_value = "zero")]
    tail: String,
    /// Emit one row per level instead of a single aggregate row.
    #[arg(long)]
    scan: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DoobArgs {
    /// lp, l1, small-p or improved-l1.
    #[arg(long)]
    mode: String,
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    /// Analytic-moment run: slope of the generating linear boundary.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    zeta1: String,
    #[arg(long)]
    zeta2: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    levels: usize,
    /// Scan range end as a multiple of x0.
    #[arg(long, default_value_t = 8.0)]
    span: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon_fraction: f64,
    /// Scan-row CSV output (the interval summary always goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long, default_value = "identity")]
    phi: String,
    #[arg(long, default_value_t = 256)]
    levels: usize,
    #[arg(long)]
    m_max: f64,
    /// Comma-separated initial slopes, one per stage.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long = "zeta", required = true)]
    zetas: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 256)]
    levels: usize,
    /// Level-grid end as a multiple of the start value.
    #[arg(long, default_value_t = 8.0)]
    span: f64,
}

enum Failure {
    /// Exit 1: a checked property was violated.
    Violation(String),
    /// Exit 2: configuration or input problem.
    Usage(String),
    /// Exit 3: numerical failure during computation.
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn numerical<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Numerical(e.to_string())
}

fn init_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("MAXBOUND_THREADS") {
        let k: usize = v
            .parse()
            .map_err(|_| Failure::Usage(format!("MAXBOUND_THREADS '{v}' is not an integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(usage)?;
    }
    Ok(())
}

fn components(specs: &[String], n: Option<usize>) -> Result<Vec<BoundaryFn>, Failure> {
    let parsed: Vec<BoundaryFn> = specs
        .iter()
        .map(|s| parse::boundary_spec(s))
        .collect::<Result<_, _>>()
        .map_err(Failure::Usage)?;
    match n {
        Some(k) if parsed.len() == 1 => Ok(vec![parsed[0].clone(); k]),
        Some(k) if parsed.len() != k => Err(Failure::Usage(format!(
            "{} boundaries given but --n {k}",
            parsed.len()
        ))),
        _ => Ok(parsed),
    }
}

fn load_ensemble(path: &PathBuf) -> Result<MonteCarloEnsemble, Failure> {
    io::read_ensemble(path).map_err(Failure::Usage)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let comps = components(&args.boundaries, args.n)?;
    let xi = StoppingBoundaryVector::new(comps, args.x0).map_err(usage)?;
    let ens = if args.walk {
        let dt = args
            .dt
            .unwrap_or_else(|| maxbound::embedding::default_walk_dt(args.x0));
        let walked =
            walk_ensemble(&xi, dt, args.step_cap, args.paths, args.seed).map_err(numerical)?;
        if walked.capped > 0 {
            eprintln!("dropped {} paths at the step budget", walked.capped);
        }
        walked.ensemble
    } else {
        exact_ensemble(&xi, args.paths, args.seed).map_err(numerical)?
    };
    io::write_ensemble(&args.out, &ens).map_err(numerical)
}

const BOUND_HEADER: &str = "m,ub,ub_stderr,empirical,empirical_stderr,truncation_tail";

fn cmd_bound(args: &BoundArgs) -> Result<(), Failure> {
    let ens = load_ensemble(&args.ensemble)?;
    let comps = components(&args.zetas, args.n)?;
    let b = BoundaryVector::new(comps, ens.start()).map_err(usage)?;
    let phi = parse::phi_spec(&args.phi).map_err(Failure::Usage)?;
    let tail = match args.tail.split_once(':') {
        None if args.tail == "zero" => TailRule::EmpiricalZero,
        Some(("analytic", a)) => TailRule::Analytic {
            alpha: a
                .parse()
                .map_err(|_| Failure::Usage(format!("bad tail slope '{a}'")))?,
        },
        _ => {
            return Err(Failure::Usage(format!(
                "unknown tail rule '{}' (expected zero or analytic:<alpha>)",
                args.tail
            )))
        }
    };
    let m_max = match args.m_max {
        Some(m) => m,
        None => zero_tail_level(&ens, &b).map_err(numerical)?,
    };
    let mut rows = vec![BOUND_HEADER.to_string()];
    if args.scan {
        let grid = QuadratureGrid::geometric(ens.start(), m_max, args.levels).map_err(usage)?;
        let maxima = ens.terminal_maxima();
        for &m in &grid.levels {
            let (ub, ub_se) = ub_at_level(&ens, &b, m).map_err(numerical)?;
            let hits = maxima.iter().filter(|&&s| s >= m).count() as f64;
            let p = hits / maxima.len() as f64;
            let p_se = (p * (1.0 - p) / maxima.len() as f64).sqrt();
            rows.push(format!(
                "{},{},{},{},{},{}",
                fmt(m),
                fmt(ub),
                fmt(ub_se),
                fmt(p),
                fmt(p_se),
                fmt(0.0)
            ));
        }
    } else {
        let grid = QuadratureGrid::geometric(ens.start(), m_max, args.levels).map_err(usage)?;
        let opts = UbOptions {
            tail,
            ..UbOptions::default()
        };
        let rep = ub_functional(&ens, &b, &phi, &grid, &opts).map_err(numerical)?;
        let (emp, emp_se) = empirical_max_functional(&ens, &phi);
        rows.push(format!(
            "total,{},{},{},{},{}",
            fmt(rep.value),
            fmt(rep.stderr),
            fmt(emp),
            fmt(emp_se),
            fmt(rep.truncation_tail)
        ));
    }
    io::emit(args.out.as_deref(), &rows).map_err(numerical)
}

fn cmd_doob(args: &DoobArgs) -> Result<(), Failure> {
    let rows = match args.mode.as_str() {
        "lp" => {
            let p = args
                .p
                .ok_or_else(|| Failure::Usage("--mode lp needs --p".into()))?;
            let path = args
                .ensemble
                .as_ref()
                .ok_or_else(|| Failure::Usage("--mode lp needs --ensemble".into()))?;
            let ens = load_ensemble(path)?;
            let phi = PhiSpec::power(p).map_err(usage)?;
            let (emp, emp_se) = empirical_max_functional(&ens, &phi);
            let refined = doob_lp_refined(&ens, p, None).map_err(numerical)?;
            let powers: Vec<f64> = ens.terminal_values().iter().map(|x| x.powf(p)).collect();
            let (mp, _) = mean_stderr(&powers);
            let classical = doob_lp_classical(p, mp, ens.start()).map_err(numerical)?;
            vec![
                "empirical,empirical_stderr,refined,refined_stderr,truncation_tail,classical"
                    .to_string(),
                format!(
                    "{},{},{},{},{},{}",
                    fmt(emp),
                    fmt(emp_se),
                    fmt(refined.value),
                    fmt(refined.stderr),
                    fmt(refined.truncation_tail),
                    fmt(classical)
                ),
            ]
        }
        "l1" => {
            let path = args
                .ensemble
                .as_ref()
                .ok_or_else(|| Failure::Usage("--mode l1 needs --ensemble".into()))?;
            let ens = load_ensemble(path)?;
            let (emp, emp_se) = mean_stderr(&ens.terminal_maxima());
            let refined = doob_l1_refined(&ens, None).map_err(numerical)?;
            let xlx: Vec<f64> = ens
                .terminal_values()
                .iter()
                .map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 })
                .collect();
            let (ll, _) = mean_stderr(&xlx);
            let classical = doob_l1_classical(ll, ens.start());
            vec![
                "empirical,empirical_stderr,refined,refined_stderr,truncation_tail,classical"
                    .to_string(),
                format!(
                    "{},{},{},{},{},{}",
                    fmt(emp),
                    fmt(emp_se),
                    fmt(refined.value),
                    fmt(refined.stderr),
                    fmt(refined.truncation_tail),
                    fmt(classical)
                ),
            ]
        }
        "small-p" => {
            let p = args
                .p
                .ok_or_else(|| Failure::Usage("--mode small-p needs --p".into()))?;
            let ms = moment_summary(args, p)?;
            let out = doob_small_p(p, &ms).map_err(numerical)?;
            vec![
                "alpha_hat,sharp,relaxed".to_string(),
                format!(
                    "{},{},{}",
                    fmt(out.alpha_hat),
                    fmt(out.sharp),
                    fmt(out.relaxed)
                ),
            ]
        }
        "improved-l1" => {
            let ms = moment_summary(args, 0.5)?;
            let out = improved_l1(&ms).map_err(numerical)?;
            vec![
                "alpha_hat,bound,classical".to_string(),
                format!(
                    "{},{},{}",
                    fmt(out.alpha_hat),
                    fmt(out.bound),
                    fmt(out.classical)
                ),
            ]
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown mode '{other}' (expected lp, l1, small-p or improved-l1)"
            )))
        }
    };
    io::emit(args.out.as_deref(), &rows).map_err(numerical)
}

fn moment_summary(args: &DoobArgs, p: f64) -> Result<MomentSummary, Failure> {
    match (&args.alpha, &args.ensemble) {
        (Some(a), None) => MomentSummary::analytic_extremal(*a, args.x0, p).map_err(usage),
        (None, Some(path)) => {
            let ens = load_ensemble(path)?;
            MomentSummary::from_ensemble(&ens, p).map_err(numerical)
        }
        _ => Err(Failure::Usage(
            "give exactly one of --alpha (analytic) or --ensemble (sampled)".into(),
        )),
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<(), Failure> {
    let c1 = parse::boundary_spec(&args.zeta1).map_err(Failure::Usage)?;
    let c2 = parse::boundary_spec(&args.zeta2).map_err(Failure::Usage)?;
    let z1 = BoundaryVector::repeated(c1, args.n, args.x0).map_err(usage)?;
    let z2 = BoundaryVector::repeated(c2, args.n, args.x0).map_err(usage)?;
    let cfg = CompareConfig {
        epsilon_fraction: args.epsilon_fraction,
        paths: args.paths,
        seed: args.seed,
        levels: args.levels,
        span: args.span,
    };
    let rep = compare_orderings(&z1, &z2, &cfg).map_err(numerical)?;
    println!(
        "x1 interval: ({}, {}) over {} levels",
        fmt(rep.interval_x1.m_lo),
        fmt(rep.interval_x1.m_hi),
        rep.interval_x1.levels
    );
    println!(
        "x2 interval: ({}, {}) over {} levels",
        fmt(rep.interval_x2.m_lo),
        fmt(rep.interval_x2.m_hi),
        rep.interval_x2.levels
    );
    if args.out.is_some() {
        let mut rows =
            vec!["martingale,m,own,own_stderr,other,other_stderr,diff,diff_stderr".to_string()];
        for (tag, scan) in [("x1", &rep.rows_x1), ("x2", &rep.rows_x2)] {
            for r in scan {
                rows.push(format!(
                    "{tag},{},{},{},{},{},{},{}",
                    fmt(r.m),
                    fmt(r.own),
                    fmt(r.own_se),
                    fmt(r.other),
                    fmt(r.other_se),
                    fmt(r.diff),
                    fmt(r.diff_se)
                ));
            }
        }
        io::emit(args.out.as_deref(), &rows).map_err(numerical)?;
    }
    Ok(())
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<(), Failure> {
    let ens = load_ensemble(&args.ensemble)?;
    let phi = parse::phi_spec(&args.phi).map_err(Failure::Usage)?;
    let slopes = match &args.init {
        Some(s) => s
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Failure::Usage(format!("bad initial slope '{v}'")))
            })
            .collect::<Result<Vec<f64>, Failure>>()?,
        None => vec![0.3; ens.stages()],
    };
    let q = QuadratureGrid::geometric(ens.start(), args.m_max, args.levels).map_err(usage)?;
    let family = ZetaFamily::Linear { slopes };
    let out = optimize_zeta_vector(&ens, &phi, &family, &q).map_err(numerical)?;
    let mut rows = vec!["stage,slope".to_string()];
    for (i, s) in out.slopes.iter().enumerate() {
        rows.push(format!("{},{}", i + 1, fmt(*s)));
    }
    rows.push(format!("value,{}", fmt(out.value)));
    io::emit(args.out.as_deref(), &rows).map_err(numerical)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let ens = load_ensemble(&args.ensemble)?;
    let comps = components(&args.zetas, args.n)?;
    let b = BoundaryVector::new(comps, ens.start()).map_err(usage)?;
    let grid = QuadratureGrid::geometric(ens.start(), args.span * ens.start(), args.levels)
        .map_err(usage)?;
    let rep = verify_inequality(&ens, &b, &grid.levels).map_err(numerical)?;
    println!(
        "pairs={} violations={} worst_residual={}",
        rep.pairs,
        rep.violations,
        fmt(rep.worst_residual)
    );
    if rep.violations > 0 {
        return Err(Failure::Violation(format!(
            "{} pathwise violations",
            rep.violations
        )));
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let run = || -> Result<(), Failure> {
        init_threads()?;
        match &cli.command {
            Command::Simulate(a) => cmd_simulate(a),
            Command::Bound(a) => cmd_bound(a),
            Command::Doob(a) => cmd_doob(a),
            Command::Compare(a) => cmd_compare(a),
            Command::Optimize(a) => cmd_optimize(a),
            Command::Verify(a) => cmd_verify(a),
        }
    };
    if let Err(f) = run() {
        eprintln!("error: {}", f.message());
        std::process::exit(f.code());
    }
}

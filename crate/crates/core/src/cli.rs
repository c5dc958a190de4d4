//! `rmdp` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible projection,
//! 3 value iteration did not converge (or its cross-check failed).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bellman::{extract_policy, nominal_value_iteration, robust_value_iteration};
use crate::bench::{run_bench, write_csv, BenchConfig, Operation};
use crate::error::{Error, Result};
use crate::format::{load_instance, read_query, save_instance, write_policy};
use crate::instancegen::{random_projection_instance, random_rmdp, DEFAULT_DISCOUNT, RNG_ALGORITHM};
use crate::model::{dot, DivergenceKind, ProjectionStatus};
use crate::projection::project;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rmdp", version, about = "Robust MDP solver with phi-divergence ambiguity sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one generalized projection.
    Project(ProjectArgs),
    /// Robust value iteration on an instance file.
    Vi(ViArgs),
    /// Time projections or Bellman updates on random instances (CSV output).
    Bench(BenchArgs),
    /// Generate a random instance file.
    Gen(GenArgs),
}

fn parse_kind(s: &str) -> std::result::Result<DivergenceKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// kl, burg, variation or chi2
    #[arg(long, value_parser = parse_kind)]
    div: DivergenceKind,
    /// Query document {"nominal": [...], "cost": [...], "threshold": β}
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    instance: Option<PathBuf>,
    /// Draw a random query instead of reading one.
    #[arg(long, requires = "states")]
    random: bool,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Width of the returned value interval (KL and Burg).
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ViArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Target accuracy of the returned value function.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Write the extracted policy here.
    #[arg(long)]
    policy_out: Option<PathBuf>,
    /// Also run classical value iteration on the nominal kernel and compare.
    #[arg(long)]
    cross_check: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpArg {
    Projection,
    Bellman,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    op: OpArg,
    #[arg(long, value_parser = parse_kind)]
    div: DivergenceKind,
    /// Comma-separated sizes (S, or S = A for bellman).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = crate::bench::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also time the brute-force oracle (S <= 4 projections, S = A <= 3 Bellman).
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = crate::bench::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = crate::bench::DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    states: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    actions: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_kind, default_value = "kl")]
    div: DivergenceKind,
    #[arg(long)]
    discount: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Project(a) => cmd_project(a, out),
        Command::Vi(a) => cmd_vi(a, out, err),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Gen(a) => cmd_gen(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_project(a: ProjectArgs, out: &mut dyn Write) -> Result<i32> {
    let (query, source) = match (&a.instance, a.random) {
        (Some(path), _) => {
            let bytes = std::fs::read(path)?;
            (read_query(&bytes, a.delta)?, json!({ "file": path }))
        }
        (None, _) => {
            let states = a.states.unwrap_or(0);
            let mut q = random_projection_instance(states, a.seed)?;
            q.accuracy = a.delta;
            (q, json!({ "rng": RNG_ALGORITHM, "seed": a.seed, "states": states }))
        }
    };
    query.check()?;
    let r = project(a.div, &query)?;
    let status = match r.status {
        ProjectionStatus::Solved => "solved",
        ProjectionStatus::Trivial => "trivial",
        ProjectionStatus::Infeasible => "infeasible",
    };
    if a.json {
        let doc = json!({
            "divergence": a.div,
            "status": status,
            "lower": r.lower,
            "upper": r.upper,
            "value": r.value(),
            "width": r.width(),
            "alpha": r.alpha,
            "zeta": r.zeta,
            "iterations": r.iterations(),
            "delta": a.delta,
            "trace": r.trace,
            "source": source,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"))?;
    } else {
        writeln!(out, "divergence: {}", a.div)?;
        writeln!(out, "status:     {status}")?;
        writeln!(out, "interval:   [{}, {}]", r.lower, r.upper)?;
        writeln!(out, "width:      {:e}", r.width())?;
        match r.alpha {
            Some(alpha) => writeln!(out, "alpha:      {alpha}")?,
            None => writeln!(out, "alpha:      -")?,
        }
        writeln!(out, "iterations: {}", r.iterations())?;
        if a.random {
            writeln!(out, "rng:        {RNG_ALGORITHM} seed {}", a.seed)?;
        }
    }
    Ok(if r.status == ProjectionStatus::Infeasible { EXIT_INFEASIBLE } else { EXIT_OK })
}

fn cmd_vi(a: ViArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let instance = load_instance(&a.instance)?;
    let report = robust_value_iteration(&instance, a.epsilon, a.max_iters)?;
    let v = &report.values;
    let v_min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let v_max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v_mean = v.iter().sum::<f64>() / v.len() as f64;
    let initial_value = instance.initial_dist().map(|p0| dot(p0, v));

    let cross = if a.cross_check {
        let classical = nominal_value_iteration(&instance, a.epsilon, a.max_iters)?;
        let diff = classical.values.max_abs_diff(v);
        // With κ = 0 both runs target the same fixed point; otherwise the
        // robust value may only be lower.
        let excess = classical.values.iter().zip(v.iter()).map(|(c, r)| r - c).fold(0.0, f64::max);
        let ok = if instance.kappa() == 0.0 { diff <= a.epsilon } else { excess <= a.epsilon };
        Some((classical, diff, ok))
    } else {
        None
    };

    if let Some(path) = &a.policy_out {
        let policy = extract_policy(&instance, v, a.epsilon)?;
        std::fs::write(path, write_policy(&policy))?;
    }

    if a.json {
        let mut doc = json!({
            "states": instance.states(),
            "actions": instance.actions(),
            "divergence": instance.kind(),
            "kappa": instance.kappa(),
            "discount": instance.discount(),
            "epsilon": a.epsilon,
            "converged": report.converged,
            "iterations": report.iterations,
            "residual": report.residual,
            "values": v.as_slice(),
            "min": v_min,
            "max": v_max,
            "mean": v_mean,
            "initial_value": initial_value,
            "history": report.history,
        });
        if let Some((classical, diff, ok)) = &cross {
            doc["cross_check"] = json!({ "nominal_values": classical.values.as_slice(), "max_abs_diff": diff, "ok": ok });
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"))?;
    } else {
        writeln!(
            out,
            "instance:   S = {}, A = {}, {}, kappa = {}, discount = {}",
            instance.states(),
            instance.actions(),
            instance.kind(),
            instance.kappa(),
            instance.discount()
        )?;
        writeln!(out, "converged:  {} after {} sweeps", report.converged, report.iterations)?;
        writeln!(out, "residual:   {:e}", report.residual)?;
        writeln!(out, "v* min:     {v_min}")?;
        writeln!(out, "v* max:     {v_max}")?;
        writeln!(out, "v* mean:    {v_mean}")?;
        if let Some(x) = initial_value {
            writeln!(out, "p0' v*:     {x}")?;
        }
        if let Some((_, diff, ok)) = &cross {
            writeln!(out, "cross-check: max |robust - nominal| = {diff:e} ({})", if *ok { "ok" } else { "FAILED" })?;
        }
    }

    if !report.converged {
        writeln!(err, "value iteration stopped at --max-iters {} without converging", a.max_iters)?;
        return Ok(EXIT_NOT_CONVERGED);
    }
    if matches!(cross, Some((_, _, false))) {
        writeln!(err, "cross-check against classical value iteration failed")?;
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let operation = match a.op {
        OpArg::Projection => Operation::Projection,
        OpArg::Bellman => Operation::Bellman,
    };
    let mut config = BenchConfig::new(operation, a.div);
    if let Some(sizes) = a.sizes {
        config.sizes = sizes;
    }
    config.trials = a.trials;
    config.seed = a.seed;
    config.oracle = a.oracle;
    config.delta = a.delta;
    config.epsilon = a.epsilon;
    let records = run_bench(&config)?;
    match &a.out {
        Some(path) => write_csv(&records, std::fs::File::create(path)?)?,
        None => write_csv(&records, out)?,
    }
    Ok(EXIT_OK)
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<i32> {
    let discount = a.discount.unwrap_or(DEFAULT_DISCOUNT);
    let instance = random_rmdp(a.states as usize, a.actions as usize, a.seed, discount, a.div)?;
    save_instance(&a.out, &instance)?;
    let label = |given: bool| if given { "" } else { " (default)" };
    writeln!(out, "wrote {}", a.out.display())?;
    writeln!(out, "rng:        {RNG_ALGORITHM}")?;
    writeln!(out, "seed:       {}", a.seed)?;
    writeln!(out, "states:     {}", a.states)?;
    writeln!(out, "actions:    {}", a.actions)?;
    writeln!(out, "divergence: {}", a.div)?;
    writeln!(out, "discount:   {discount}{}", label(a.discount.is_some()))?;
    writeln!(out, "rewards:    U(0,1) (default)")?;
    writeln!(out, "kappa:      {} ~ U(0,1)", instance.kappa())?;
    Ok(EXIT_OK)
}

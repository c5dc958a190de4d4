//! Timing harness behind `rmdp bench`.
//!
//! Each configuration runs one untimed warm-up trial followed by `trials`
//! timed ones; the clock brackets only the solver call. Trial `t` at size
//! `S` uses the instance generated from `mix_seed(seed, S, t)`, so the
//! non-timing columns are a pure function of the configuration.
//!
//! The Bellman operation times one state's update with cost vectors drawn
//! directly (`b_a ~ U(0,1)^S`, `S = A`), which is the unit the per-state
//! complexity bounds describe.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::bellman::{solve_state, StateProblem};
use crate::error::{Error, Result};
use crate::instancegen::{mix_seed, random_bellman_state, random_projection_instance, random_rmdp, DEFAULT_DISCOUNT};
use crate::model::{DivergenceKind, ValueVector};
use crate::oracle::{
    oracle_bellman, oracle_project_grid, BELLMAN_MAX_ACTIONS, BELLMAN_MAX_STATES, GRID_MAX_STATES,
};
use crate::projection::project;

pub const PROJECTION_SIZES: [usize; 5] = [1000, 1500, 2000, 2500, 3000];
pub const BELLMAN_SIZES: [usize; 5] = [100, 150, 200, 250, 300];
pub const DEFAULT_TRIALS: usize = 50;
pub const DEFAULT_DELTA: f64 = 1e-6;
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Lattice step of the projection oracle rows.
pub const ORACLE_GRID_STEP: f64 = 1.0 / 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Projection,
    Bellman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Fast,
    Oracle,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub divergence: DivergenceKind,
    pub operation: Operation,
    #[serde(rename = "S")]
    pub states: usize,
    #[serde(rename = "A")]
    pub actions: usize,
    pub solver: Solver,
    pub trials: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub p50_ms: f64,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub operation: Operation,
    pub kind: DivergenceKind,
    /// `S` for projections, `S = A` for Bellman updates.
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Also time the brute-force oracle (small sizes only).
    pub oracle: bool,
    /// Projection accuracy δ.
    pub delta: f64,
    /// Bellman accuracy ε.
    pub epsilon: f64,
}

impl BenchConfig {
    pub fn new(operation: Operation, kind: DivergenceKind) -> Self {
        let sizes = match operation {
            Operation::Projection => PROJECTION_SIZES.to_vec(),
            Operation::Bellman => BELLMAN_SIZES.to_vec(),
        };
        BenchConfig {
            operation,
            kind,
            sizes,
            trials: DEFAULT_TRIALS,
            seed: 0,
            oracle: false,
            delta: DEFAULT_DELTA,
            epsilon: DEFAULT_EPSILON,
        }
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("no sizes given".into()));
        }
        if let Some(&s) = self.sizes.iter().find(|&&s| s < 2) {
            return Err(Error::InvalidArgument(format!("sizes must be >= 2, got {s}")));
        }
        if self.oracle {
            let limit = match self.operation {
                Operation::Projection => GRID_MAX_STATES,
                Operation::Bellman => BELLMAN_MAX_STATES.min(BELLMAN_MAX_ACTIONS),
            };
            if let Some(&s) = self.sizes.iter().find(|&&s| s > limit) {
                return Err(Error::SizeLimit(format!(
                    "--oracle supports sizes up to {limit} for {} benchmarks, got {s}",
                    match self.operation {
                        Operation::Projection => "projection",
                        Operation::Bellman => "bellman",
                    }
                )));
            }
        }
        Ok(())
    }

    fn tol(&self) -> f64 {
        match self.operation {
            Operation::Projection => self.delta,
            Operation::Bellman => self.epsilon,
        }
    }
}

/// Runs every configured size (and the oracle if requested), sequentially.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config.check()?;
    let mut records = Vec::new();
    for &size in &config.sizes {
        let mut solvers = vec![Solver::Fast];
        if config.oracle {
            solvers.push(Solver::Oracle);
        }
        for solver in solvers {
            let times = time_trials(config, size, solver)?;
            let (mean_ms, std_ms, p50_ms) = summarize(&times);
            records.push(BenchRecord {
                divergence: config.kind,
                operation: config.operation,
                states: size,
                actions: match config.operation {
                    Operation::Projection => 1,
                    Operation::Bellman => size,
                },
                solver,
                trials: config.trials,
                mean_ms,
                std_ms,
                p50_ms,
                seed: config.seed,
                tol: config.tol(),
            });
        }
    }
    Ok(records)
}

fn time_trials(config: &BenchConfig, size: usize, solver: Solver) -> Result<Vec<f64>> {
    // Trial 0 is the warm-up.
    let mut times = Vec::with_capacity(config.trials);
    for trial in 0..=config.trials {
        let seed = mix_seed(config.seed, size as u64, trial as u64);
        let elapsed = time_one(config, size, solver, seed)?;
        if trial > 0 {
            times.push(elapsed);
        }
    }
    Ok(times)
}

fn time_one(config: &BenchConfig, size: usize, solver: Solver, seed: u64) -> Result<f64> {
    let kind = config.kind;
    match (config.operation, solver) {
        (Operation::Projection, _) => {
            let mut query = random_projection_instance(size, seed)?;
            query.accuracy = config.delta;
            let start = Instant::now();
            let value = match solver {
                Solver::Fast => project(kind, &query)?.upper,
                Solver::Oracle => oracle_project_grid(kind, &query, ORACLE_GRID_STEP)?,
            };
            let elapsed = start.elapsed();
            std::hint::black_box(value);
            Ok(elapsed.as_secs_f64() * 1e3)
        }
        (Operation::Bellman, Solver::Fast) => {
            let state = random_bellman_state(size, size, seed)?;
            let problem = StateProblem {
                nominal: state.nominal.iter().map(Vec::as_slice).collect(),
                cost: state.cost.clone(),
                kappa: state.kappa,
                kind,
                upper: 1.0,
            };
            let start = Instant::now();
            let outcome = solve_state(&problem, config.epsilon)?;
            let elapsed = start.elapsed();
            std::hint::black_box(outcome);
            Ok(elapsed.as_secs_f64() * 1e3)
        }
        (Operation::Bellman, Solver::Oracle) => {
            let instance = random_rmdp(size, size, seed, DEFAULT_DISCOUNT, kind)?;
            let v = ValueVector::zeros(size);
            let start = Instant::now();
            let bracket = oracle_bellman(&instance, &v, 0, config.epsilon)?;
            let elapsed = start.elapsed();
            std::hint::black_box(bracket);
            Ok(elapsed.as_secs_f64() * 1e3)
        }
    }
}

/// `(mean, sample std, median)`; the std of a single trial is 0.
pub fn summarize(times: &[f64]) -> (f64, f64, f64) {
    let n = times.len();
    let mean = times.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let p50 = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    (mean, std, p50)
}

/// Writes the header and one line per record.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(HEADER)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const HEADER: [&str; 11] =
    ["divergence", "operation", "S", "A", "solver", "trials", "mean_ms", "std_ms", "p50_ms", "seed", "tol"];

/// Least-squares slope of `log(time)` against `log(size)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

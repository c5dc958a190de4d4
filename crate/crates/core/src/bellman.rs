//! Robust Bellman operator, robust value iteration and policy extraction.
//!
//! For one state `s` the s-rectangular update is
//!
//! ```text
//!     [𝔍(v)]_s = min { θ : Σ_a P_a(θ) ≤ κ },   P_a(θ) = min { d(p, p̄_sa) : b_aᵀp ≤ θ }
//! ```
//!
//! with `b_a = r_sa + λv`. The outer bisection keeps `θ` between
//! `max_a min b_a` and `R̄ = max r/(1−λ)`; at each midpoint every `P_a` is
//! bracketed to accuracy `δ = εκ/(2AR̄ + Aε)`, which is enough to decide the
//! midpoint or to certify it as an ε-accurate value.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{dot, DivergenceKind, MdpInstance, Policy, ProjectionStatus, ValueVector};
use crate::projection::project_slices;

/// Safety cap on outer bisection steps; the interval halves every step.
const MAX_OUTER_STEPS: usize = 256;
/// Safety cap on fixed-policy evaluation sweeps.
const MAX_EVAL_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `v̄ − v̲ ≤ ε`; a point of the interval is returned.
    IntervalClosed,
    /// `Σ d̲_a ≤ κ < Σ d̄_a` at the current midpoint, which is returned.
    BudgetBracketed,
    /// `κ = 0`: the nominal Bellman value, no bisection.
    NominalShortCircuit,
}

/// Result of one state's robust Bellman update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellmanOutcome {
    /// Estimate of `[𝔍(v)]_s`, within ε of the true value.
    pub value: f64,
    /// Final outer bisection interval.
    pub lower: f64,
    pub upper: f64,
    pub termination: Termination,
    /// Projection duals `α*_a` at `value`. Actions that cannot reach `value`
    /// at any divergence carry `+∞`.
    pub duals: Vec<f64>,
    pub iterations: usize,
    /// Accuracy requested from every inner projection.
    pub delta: f64,
}

/// One state's update in isolation: the nominal rows and cost vectors of
/// each action, the budget and an upper bound on the value.
#[derive(Debug, Clone)]
pub struct StateProblem<'a> {
    pub nominal: Vec<&'a [f64]>,
    pub cost: Vec<Vec<f64>>,
    pub kappa: f64,
    pub kind: DivergenceKind,
    /// `R̄`; also enters the inner accuracy δ.
    pub upper: f64,
}

impl<'a> StateProblem<'a> {
    /// State `s` of `instance` at value estimate `v`, optionally restricted to
    /// a subset of the actions.
    pub fn from_instance(instance: &'a MdpInstance, s: usize, v: &[f64], actions: Option<&[usize]>) -> Self {
        let all: Vec<usize>;
        let actions = match actions {
            Some(a) => a,
            None => {
                all = (0..instance.actions()).collect();
                &all
            }
        };
        StateProblem {
            nominal: actions.iter().map(|&a| instance.nominal(s, a)).collect(),
            cost: actions.iter().map(|&a| instance.backup_costs(s, a, v)).collect(),
            kappa: instance.kappa(),
            kind: instance.kind(),
            upper: instance.value_upper_bound(),
        }
    }

    fn actions(&self) -> usize {
        self.nominal.len()
    }

    fn nominal_values(&self) -> Vec<f64> {
        self.nominal.iter().zip(&self.cost).map(|(p, b)| dot(p, b)).collect()
    }
}

struct BudgetSums {
    lower: f64,
    upper: f64,
    /// False when the loop stopped early on `Σ d̲_a > κ`.
    complete: bool,
}

impl BudgetSums {
    /// Midpoint of the bracket on `Σ_a P_a(θ) − κ`.
    fn excess(&self, kappa: f64) -> Option<f64> {
        let g = 0.5 * (self.lower + self.upper) - kappa;
        (self.complete && g.is_finite()).then_some(g)
    }
}

/// `(Σ d̲_a, Σ d̄_a)` at `theta`. With `early_exit`, stops once `Σ d̲_a > κ`.
fn budget_sums(p: &StateProblem, theta: f64, delta: f64, early_exit: bool) -> BudgetSums {
    let mut sums = BudgetSums { lower: 0.0, upper: 0.0, complete: true };
    for (nominal, cost) in p.nominal.iter().zip(&p.cost) {
        let r = project_slices(p.kind, nominal, cost, theta, delta);
        sums.lower += r.lower;
        sums.upper += r.upper;
        if early_exit && sums.lower > p.kappa {
            sums.complete = false;
            break;
        }
    }
    sums
}

fn duals_at(p: &StateProblem, theta: f64, delta: f64) -> Vec<f64> {
    p.nominal
        .iter()
        .zip(&p.cost)
        .map(|(nominal, cost)| {
            let r = project_slices(p.kind, nominal, cost, theta, delta);
            match r.status {
                ProjectionStatus::Trivial => 0.0,
                ProjectionStatus::Infeasible => f64::INFINITY,
                ProjectionStatus::Solved => r.alpha.unwrap_or(f64::INFINITY),
            }
        })
        .collect()
}

/// Outer bisection for a single state.
pub fn solve_state(problem: &StateProblem, epsilon: f64) -> Result<BellmanOutcome> {
    check_epsilon(epsilon)?;
    if problem.actions() == 0 {
        return Err(Error::InvalidArgument("state problem has no actions".into()));
    }
    Ok(solve(problem, epsilon, true))
}

fn solve(p: &StateProblem, epsilon: f64, with_duals: bool) -> BellmanOutcome {
    let na = p.actions();
    let nominal_best = p.nominal_values().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if p.kappa == 0.0 {
        return BellmanOutcome {
            value: nominal_best,
            lower: nominal_best,
            upper: nominal_best,
            termination: Termination::NominalShortCircuit,
            duals: vec![0.0; na],
            iterations: 0,
            delta: 0.0,
        };
    }

    let delta = epsilon * p.kappa / (2.0 * na as f64 * p.upper + na as f64 * epsilon);
    let mut lo = p
        .cost
        .iter()
        .map(|b| b.iter().copied().fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut hi = p.upper.max(nominal_best);
    let mut iterations = 0;
    // Bracket midpoints of Σ P_a − κ at the current ends, when known.
    let (mut excess_lo, mut excess_hi) = (None, None);
    let (value, termination) = loop {
        let theta = 0.5 * (lo + hi);
        if hi - lo <= epsilon || theta <= lo || theta >= hi || iterations >= MAX_OUTER_STEPS {
            break (theta, Termination::IntervalClosed);
        }
        let sums = budget_sums(p, theta, delta, true);
        iterations += 1;
        if sums.lower <= p.kappa && p.kappa < sums.upper {
            break (theta, Termination::BudgetBracketed);
        }
        if sums.upper <= p.kappa {
            hi = theta;
            excess_hi = sums.excess(p.kappa);
        } else {
            lo = theta;
            excess_lo = sums.excess(p.kappa);
        }
    };
    let value = if termination == Termination::IntervalClosed {
        let g_lo = excess_lo.or_else(|| budget_sums(p, lo, delta, false).excess(p.kappa));
        let g_hi = excess_hi.or_else(|| budget_sums(p, hi, delta, false).excess(p.kappa));
        regula_falsi(lo, hi, g_lo, g_hi).unwrap_or(value)
    } else {
        value
    };
    let duals = if with_duals { duals_at(p, value, delta) } else { Vec::new() };
    BellmanOutcome { value, lower: lo, upper: hi, termination, duals, iterations, delta }
}

/// Root of the secant through `(lo, g_lo)` and `(hi, g_hi)`. Any point of the
/// final interval is ε-accurate; the secant point is usually far closer to the
/// true value than the midpoint.
fn regula_falsi(lo: f64, hi: f64, g_lo: Option<f64>, g_hi: Option<f64>) -> Option<f64> {
    let (g_lo, g_hi) = (g_lo?, g_hi?);
    if !(g_lo > 0.0 && g_hi <= 0.0) {
        return None;
    }
    let t = g_lo / (g_lo - g_hi);
    Some((lo + t * (hi - lo)).clamp(lo, hi))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("accuracy epsilon must be > 0, got {epsilon}")))
    }
}

fn check_values(instance: &MdpInstance, v: &[f64]) -> Result<()> {
    if v.len() != instance.states() {
        return Err(Error::InvalidArgument(format!(
            "value vector has {} entries, instance has {} states",
            v.len(),
            instance.states()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("value vector has non-finite entries".into()));
    }
    Ok(())
}

/// ε-accurate `[𝔍(v)]_s`.
pub fn robust_bellman_state(instance: &MdpInstance, v: &ValueVector, s: usize, epsilon: f64) -> Result<BellmanOutcome> {
    check_epsilon(epsilon)?;
    check_values(instance, v)?;
    if s >= instance.states() {
        return Err(Error::InvalidArgument(format!("state {s} out of range")));
    }
    Ok(solve(&StateProblem::from_instance(instance, s, v, None), epsilon, true))
}

/// ε-accurate `𝔍(v)` with the per-state outcomes. States are solved in
/// parallel; each result depends only on its own state.
pub fn robust_bellman(instance: &MdpInstance, v: &ValueVector, epsilon: f64) -> Result<(ValueVector, Vec<BellmanOutcome>)> {
    check_epsilon(epsilon)?;
    check_values(instance, v)?;
    let outcomes: Vec<BellmanOutcome> = (0..instance.states())
        .into_par_iter()
        .map(|s| solve(&StateProblem::from_instance(instance, s, v, None), epsilon, true))
        .collect();
    let values = ValueVector(outcomes.iter().map(|o| o.value).collect());
    Ok((values, outcomes))
}

fn robust_values(instance: &MdpInstance, v: &[f64], epsilon: f64) -> Vec<f64> {
    (0..instance.states())
        .into_par_iter()
        .map(|s| solve(&StateProblem::from_instance(instance, s, v, None), epsilon, false).value)
        .collect()
}

/// `[T(v)]_s = max_a p̄_saᵀ(r_sa + λv)`
pub fn nominal_bellman(instance: &MdpInstance, v: &ValueVector) -> ValueVector {
    ValueVector(nominal_values(instance, v))
}

fn nominal_values(instance: &MdpInstance, v: &[f64]) -> Vec<f64> {
    (0..instance.states())
        .map(|s| {
            (0..instance.actions())
                .map(|a| dot(instance.nominal(s, a), &instance.backup_costs(s, a, v)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Outcome of a value-iteration run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViReport {
    pub values: ValueVector,
    /// `‖vᵀ − vᵀ⁻¹‖_∞`
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Robust value iteration from `v⁰ = 0`.
///
/// Each sweep applies 𝔍 with accuracy `ε(1−λ)/4` and clamps the result to
/// `[0, R̄]`; iteration stops once `‖vᵗ⁺¹ − vᵗ‖_∞ ≤ ε(1−λ)/(2λ)`, which puts
/// the final iterate within ε of the fixed point. Hitting `max_iters` is
/// reported through `converged = false`.
pub fn robust_value_iteration(instance: &MdpInstance, epsilon: f64, max_iters: usize) -> Result<ViReport> {
    check_epsilon(epsilon)?;
    let sweep_eps = epsilon * (1.0 - instance.discount()) / 4.0;
    Ok(iterate(instance, epsilon, max_iters, |v| robust_values(instance, v, sweep_eps)))
}

/// Classical value iteration on the nominal kernel, with the same stopping
/// rule as [`robust_value_iteration`].
pub fn nominal_value_iteration(instance: &MdpInstance, epsilon: f64, max_iters: usize) -> Result<ViReport> {
    check_epsilon(epsilon)?;
    Ok(iterate(instance, epsilon, max_iters, |v| nominal_values(instance, v)))
}

fn iterate(instance: &MdpInstance, epsilon: f64, max_iters: usize, sweep: impl Fn(&[f64]) -> Vec<f64>) -> ViReport {
    let lambda = instance.discount();
    let stop = epsilon * (1.0 - lambda) / (2.0 * lambda);
    let cap = instance.value_upper_bound();
    let mut v = vec![0.0; instance.states()];
    let mut history = Vec::new();
    let mut converged = false;
    while history.len() < max_iters {
        let mut next = sweep(&v);
        next.iter_mut().for_each(|x| *x = x.clamp(0.0, cap));
        let residual = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        history.push(residual);
        v = next;
        if residual <= stop {
            converged = true;
            break;
        }
    }
    ViReport {
        values: ValueVector(v),
        residual: history.last().copied().unwrap_or(f64::INFINITY),
        iterations: history.len(),
        history,
        converged,
    }
}

/// Randomized policy from the projection duals at `v`.
///
/// Per state, `π_sa ∝ α*_a` at the returned value. If some action cannot reach
/// that value, the policy is uniform over those actions; if every dual is
/// zero (the nominal kernel is already worst case), it is the deterministic
/// argmax of the nominal backup.
pub fn extract_policy(instance: &MdpInstance, v: &ValueVector, epsilon: f64) -> Result<Policy> {
    check_epsilon(epsilon)?;
    check_values(instance, v)?;
    let na = instance.actions();
    let rows: Vec<Vec<f64>> = (0..instance.states())
        .into_par_iter()
        .map(|s| {
            let problem = StateProblem::from_instance(instance, s, v, None);
            let outcome = solve(&problem, epsilon, true);
            policy_row(&outcome.duals, &problem.nominal_values())
        })
        .collect();
    Ok(Policy { states: instance.states(), actions: na, probabilities: rows.concat() })
}

fn policy_row(duals: &[f64], nominal_values: &[f64]) -> Vec<f64> {
    let na = duals.len();
    let blocked = duals.iter().filter(|d| d.is_infinite()).count();
    if blocked > 0 {
        let w = 1.0 / blocked as f64;
        return duals.iter().map(|d| if d.is_infinite() { w } else { 0.0 }).collect();
    }
    let total: f64 = duals.iter().sum();
    if total > 0.0 {
        return duals.iter().map(|d| d / total).collect();
    }
    let best = nominal_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (a, &x)| if x > acc.1 { (a, x) } else { acc })
        .0;
    let mut row = vec![0.0; na];
    row[best] = 1.0;
    row
}

/// Worst-case value of a fixed policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyValue {
    pub values: ValueVector,
    /// Set when some state randomizes and `κ > 0`: the value is then an
    /// upper approximation (see [`evaluate_policy_robust`]).
    pub upper_approximation: bool,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Iterates the fixed-policy robust operator to an ε-accurate fixed point.
///
/// Per state, the adversary faces only the actions in `supp(π_s)` and the
/// value is `min { θ : Σ_{a ∈ supp} P_a(θ) ≤ κ }`, i.e. every supported
/// action is held to the same threshold. This is exact for deterministic
/// policies and an upper approximation of `min_p Σ_a π_sa p_aᵀb_a` otherwise.
/// With `κ = 0` the π-weighted nominal backup is used, which is exact.
pub fn evaluate_policy_robust(instance: &MdpInstance, policy: &Policy, epsilon: f64) -> Result<PolicyValue> {
    check_epsilon(epsilon)?;
    policy.check()?;
    if policy.states != instance.states() || policy.actions != instance.actions() {
        return Err(Error::InvalidArgument(format!(
            "policy is {}x{}, instance is {}x{}",
            policy.states,
            policy.actions,
            instance.states(),
            instance.actions()
        )));
    }
    let support: Vec<Vec<usize>> = (0..instance.states())
        .map(|s| (0..instance.actions()).filter(|&a| policy.row(s)[a] > 0.0).collect())
        .collect();
    let kappa = instance.kappa();
    let sweep_eps = epsilon * (1.0 - instance.discount()) / 4.0;
    let sweep = |v: &[f64]| -> Vec<f64> {
        (0..instance.states())
            .into_par_iter()
            .map(|s| {
                if kappa == 0.0 {
                    return support[s]
                        .iter()
                        .map(|&a| policy.row(s)[a] * dot(instance.nominal(s, a), &instance.backup_costs(s, a, v)))
                        .sum();
                }
                let problem = StateProblem::from_instance(instance, s, v, Some(&support[s]));
                solve(&problem, sweep_eps, false).value
            })
            .collect()
    };
    let report = iterate(instance, epsilon, MAX_EVAL_SWEEPS, sweep);
    Ok(PolicyValue {
        values: report.values,
        upper_approximation: kappa > 0.0 && !policy.is_deterministic(),
        iterations: report.iterations,
        residual: report.residual,
        converged: report.converged,
    })
}

//! Brute-force reference solvers for small problems.
//!
//! * [`oracle_project_grid`] enumerates a simplex lattice and returns the
//!   smallest divergence among feasible points: an upper bound on the
//!   projection value.
//! * [`oracle_dual_scan`] maximizes the dual objective over explicit grids; by
//!   weak duality every evaluation is a lower bound.
//! * [`oracle_bellman`] combines the two into a certified bracket around one
//!   state's robust Bellman value.
//!
//! None of these share code with the fast solvers beyond the definitions of
//! `d` and the dual objective.

use crate::divergence::{divergence, dual_objective_raw};
use crate::error::{Error, Result};
use crate::model::{dot, DivergenceKind, MdpInstance, ProjectionQuery, ValueVector};

/// Largest `S` accepted by the lattice oracle.
pub const GRID_MAX_STATES: usize = 4;
/// Largest `S` and `A` accepted by [`oracle_bellman`].
pub const BELLMAN_MAX_STATES: usize = 3;
pub const BELLMAN_MAX_ACTIONS: usize = 3;

const GOLDEN_STEPS: usize = 100;
const ALPHA_OCTAVES: i32 = 60;

/// Minimum divergence over `{p ∈ Δ_S : p_i ∈ hℤ, bᵀp ≤ β} ∪ {p̄}`.
///
/// For KL and Burg the lattice keeps `p_i ≥ h` on the support of `p̄`; KL and
/// χ² keep `p_i = 0` off the support. Returns `+∞` when no candidate is
/// feasible.
pub fn oracle_project_grid(kind: DivergenceKind, query: &ProjectionQuery, h: f64) -> Result<f64> {
    query.check()?;
    let n = query.nominal.len();
    if n > GRID_MAX_STATES {
        return Err(Error::SizeLimit(format!("grid oracle supports S <= {GRID_MAX_STATES}, got {n}")));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid resolution must lie in (0, 1], got {h}")));
    }
    if query.threshold >= query.nominal_cost() {
        return Ok(0.0);
    }
    let steps = (1.0 / h).round().max(1.0) as usize;
    let bounds: Vec<(usize, usize)> = query
        .nominal
        .iter()
        .map(|&q| match (q > 0.0, kind) {
            (true, DivergenceKind::Kl | DivergenceKind::Burg) => (1, steps),
            (false, DivergenceKind::Kl | DivergenceKind::ChiSquared) => (0, 0),
            _ => (0, steps),
        })
        .collect();
    let mut grid = Lattice {
        kind,
        query,
        steps,
        bounds,
        point: vec![0.0; n],
        best: f64::INFINITY,
    };
    grid.walk(0, steps);
    Ok(grid.best)
}

struct Lattice<'a> {
    kind: DivergenceKind,
    query: &'a ProjectionQuery,
    steps: usize,
    bounds: Vec<(usize, usize)>,
    point: Vec<f64>,
    best: f64,
}

impl Lattice<'_> {
    fn walk(&mut self, i: usize, remaining: usize) {
        let n = self.point.len();
        let (lo, hi) = self.bounds[i];
        if i + 1 == n {
            if remaining < lo || remaining > hi {
                return;
            }
            self.point[i] = remaining as f64 / self.steps as f64;
            if dot(&self.point, &self.query.cost) <= self.query.threshold {
                if let Ok(d) = divergence(self.kind, &self.point, &self.query.nominal) {
                    self.best = self.best.min(d);
                }
            }
            return;
        }
        for k in lo..=hi.min(remaining) {
            self.point[i] = k as f64 / self.steps as f64;
            self.walk(i + 1, remaining - k);
        }
    }
}

/// A Lipschitz-style slack `L·h` for the lattice bound: how far above the
/// true value [`oracle_project_grid`] may land. Deliberately loose.
pub fn grid_slack(kind: DivergenceKind, query: &ProjectionQuery, h: f64) -> f64 {
    let n = query.nominal.len() as f64;
    let pmin = query.nominal.iter().copied().filter(|&q| q > 0.0).fold(1.0, f64::min);
    let lipschitz = match kind {
        DivergenceKind::Variation => 2.0 * n,
        DivergenceKind::ChiSquared => 4.0 * n / pmin,
        DivergenceKind::Kl => 2.0 * n * (1.0 + (1.0 / h).ln() + (1.0 / pmin).ln()),
        DivergenceKind::Burg => 2.0 * n / h,
    };
    lipschitz * h
}

/// Maximum of the dual objective over `alphas × zetas`; negative `α` and
/// out-of-domain points are skipped. `−∞` if nothing is evaluable.
pub fn oracle_dual_scan(kind: DivergenceKind, query: &ProjectionQuery, alphas: &[f64], zetas: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for &alpha in alphas.iter().filter(|&&a| a >= 0.0) {
        for &zeta in zetas {
            best = best.max(dual(kind, query, alpha, zeta));
        }
    }
    best
}

fn dual(kind: DivergenceKind, query: &ProjectionQuery, alpha: f64, zeta: f64) -> f64 {
    dual_objective_raw(kind, alpha, zeta, &query.nominal, &query.cost, query.threshold)
}

/// Dual scan with default grids: a geometric α grid `ᾱ·2⁻ᵏ` (plus 0) and,
/// per α, a golden-section search over ζ in `[α min b − 2.5, α max b + 1]`;
/// the best α is then refined between its grid neighbours.
///
/// Returns `+∞` when `β < min b`, where the dual is unbounded.
pub fn oracle_dual_scan_default(kind: DivergenceKind, query: &ProjectionQuery) -> f64 {
    let drop = kind.drops_zero_nominal();
    let active = query.nominal.iter().zip(&query.cost).filter(|(&q, _)| !drop || q > 0.0);
    let m = active.clone().map(|(_, &b)| b).fold(f64::INFINITY, f64::min);
    if query.threshold < m {
        return f64::INFINITY;
    }
    let b_min = query.cost.iter().copied().fold(f64::INFINITY, f64::min);
    let b_max = query.cost.iter().copied().fold(0.0, f64::max);
    let pmin = query.nominal.iter().copied().filter(|&q| q > 0.0).fold(1.0, f64::min);
    let omega = query.threshold - m;
    let alpha_max = if omega > 0.0 { (4.0 * (1.0 + (1.0 / pmin).ln()) / omega).min(1e12) } else { 1e12 };

    let best_over_zeta = |alpha: f64| -> f64 {
        let lo = alpha * b_min - 2.5;
        let hi = alpha * b_max + 1.0;
        golden_max(|z| dual(kind, query, alpha, z), lo, hi)
    };

    let mut grid: Vec<f64> = (0..=ALPHA_OCTAVES).map(|k| alpha_max * 2f64.powi(-k)).collect();
    grid.push(0.0);
    grid.reverse();
    let values: Vec<f64> = grid.iter().map(|&a| best_over_zeta(a)).collect();
    let (k, &best) = values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    best.max(golden_max(best_over_zeta, lo, hi))
}

/// Largest value seen by a golden-section search for the maximum of a
/// concave (possibly `−∞`-valued) function on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut best = f(lo).max(f(hi));
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_STEPS {
        best = best.max(fc).max(fd);
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}

/// Certified bracket around `[𝔍(v)]_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBracket {
    pub lower: f64,
    pub upper: f64,
}

impl OracleBracket {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Distance from `x` to the bracket (0 inside).
    pub fn distance(&self, x: f64) -> f64 {
        (self.lower - x).max(x - self.upper).max(0.0)
    }
}

/// Brackets one state's robust Bellman value by bisecting on `θ` twice:
/// once for the smallest `θ` whose lattice bounds certify `Σ_a P_a(θ) ≤ κ`,
/// once for the largest `θ` whose dual bounds certify `Σ_a P_a(θ) > κ`.
/// Both searches stop at width `resolution`.
pub fn oracle_bellman(instance: &MdpInstance, v: &ValueVector, s: usize, resolution: f64) -> Result<OracleBracket> {
    let (ns, na) = (instance.states(), instance.actions());
    if ns > BELLMAN_MAX_STATES || na > BELLMAN_MAX_ACTIONS {
        return Err(Error::SizeLimit(format!(
            "Bellman oracle supports S, A <= {BELLMAN_MAX_STATES}, got S = {ns}, A = {na}"
        )));
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument(format!("resolution must be > 0, got {resolution}")));
    }
    if s >= ns || v.len() != ns {
        return Err(Error::InvalidArgument("state index or value vector out of range".into()));
    }
    let h = if ns <= 2 { 1.0 / 4000.0 } else { 1.0 / 400.0 };
    let kind = instance.kind();
    let kappa = instance.kappa();
    let queries = |theta: f64| -> Vec<ProjectionQuery> {
        (0..na)
            .map(|a| ProjectionQuery {
                nominal: instance.nominal(s, a).to_vec(),
                cost: instance.backup_costs(s, a, v),
                threshold: theta,
                accuracy: 1.0,
            })
            .collect()
    };
    let feasible = |theta: f64| -> bool {
        let mut total = 0.0;
        for q in queries(theta) {
            total += oracle_project_grid(kind, &q, h).unwrap_or(f64::INFINITY);
            if total > kappa {
                return false;
            }
        }
        true
    };
    let infeasible = |theta: f64| -> bool {
        queries(theta).iter().map(|q| oracle_dual_scan_default(kind, q)).sum::<f64>() > kappa
    };

    // max_a min b_a is a lower bound and max_a p̄ᵀb_a an upper bound for any κ.
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for a in 0..na {
        let b = instance.backup_costs(s, a, v);
        lower = lower.max(b.iter().copied().fold(f64::INFINITY, f64::min));
        upper = upper.max(dot(instance.nominal(s, a), &b));
    }

    let mut lo = lower;
    while upper - lo > resolution {
        let mid = 0.5 * (lo + upper);
        if feasible(mid) {
            upper = mid;
        } else {
            lo = mid;
        }
    }
    let mut hi = upper;
    while hi - lower > resolution {
        let mid = 0.5 * (lower + hi);
        if infeasible(mid) {
            lower = mid;
        } else {
            hi = mid;
        }
    }
    Ok(OracleBracket { lower, upper })
}

//! Generalized φ-divergence projections
//!
//! ```text
//!     P(p̄; b, β) = min { d(p, p̄) : bᵀp ≤ β, p ∈ Δ_S }
//! ```
//!
//! Each solver works on a univariate (or split-wise bivariate) reformulation
//! of the dual `max_{α ≥ 0, ζ} −βα + ζ − Σ p̄ φ*(−αb + ζ)` and returns a
//! certified value bracket together with the maximizing multiplier α*.
//!
//! * KL and Burg: bisection on the derivative of a concave univariate dual,
//!   returning a bracket of width at most δ.
//! * Variation: binary search over the sorted breakpoints of a concave
//!   piecewise-linear dual; exact.
//! * χ²: one closed-form quadratic per split of the sorted costs; exact.
//!
//! For KL and χ², next states with zero nominal probability are removed from
//! the index set (the divergence is infinite unless `p = 0` there). Burg and
//! Variation keep them.

mod burg;
mod chi2;
mod kl;
mod variation;

use crate::error::{Error, Result};
use crate::model::{dot, DivergenceKind, ProjectionQuery, ProjectionResult, ProjectionStatus};

/// Below this threshold margin `β − min b`, KL and Burg report their limit
/// values instead of bisecting.
pub const OMEGA_FLOOR: f64 = 1e-12;

/// Hard cap on bisection steps; the width criterion is normally reached long
/// before (≈ 60 steps even for ω near the floor).
pub(crate) const MAX_BISECTION_STEPS: usize = 400;

/// Solves the projection for `kind`, handling the trivial (`β ≥ p̄ᵀb`) and
/// infeasible (`β < min b`) cases first.
pub fn project(kind: DivergenceKind, query: &ProjectionQuery) -> Result<ProjectionResult> {
    query.check()?;
    Ok(project_slices(kind, &query.nominal, &query.cost, query.threshold, query.accuracy))
}

/// Unchecked dispatcher used on hot paths. Inputs must satisfy the
/// [`ProjectionQuery`] invariants.
pub fn project_slices(kind: DivergenceKind, nominal: &[f64], cost: &[f64], beta: f64, delta: f64) -> ProjectionResult {
    let m = min_cost(kind, nominal, cost);
    if beta >= dot(nominal, cost) {
        return ProjectionResult::trivial();
    }
    if beta < m {
        return ProjectionResult::infeasible();
    }
    match kind {
        DivergenceKind::Kl => kl::solve(nominal, cost, beta, delta),
        DivergenceKind::Burg => burg::solve(nominal, cost, beta, delta),
        DivergenceKind::Variation => variation::solve(nominal, cost, beta),
        DivergenceKind::ChiSquared => chi2::solve(nominal, cost, beta),
    }
}

/// KL projection by bisection on `f(α) = −βα − log Σ p̄ e^{−αb}`.
///
/// Requires `min b < β`; returns [`Error::InfeasibleMargin`] otherwise.
pub fn project_kl(query: &ProjectionQuery) -> Result<ProjectionResult> {
    project_bisection(DivergenceKind::Kl, query)
}

/// Burg projection by bisection on
/// `g(a) = Σ p̄ log(1 + a (b − β)/(β − min b))` over `a ∈ [0, 1]`.
///
/// Requires `min b < β`; returns [`Error::InfeasibleMargin`] otherwise.
pub fn project_burg(query: &ProjectionQuery) -> Result<ProjectionResult> {
    project_bisection(DivergenceKind::Burg, query)
}

/// Exact variation-distance projection.
pub fn project_variation(query: &ProjectionQuery) -> Result<ProjectionResult> {
    project(DivergenceKind::Variation, query)
}

/// Exact χ²-distance projection.
pub fn project_chi2(query: &ProjectionQuery) -> Result<ProjectionResult> {
    project(DivergenceKind::ChiSquared, query)
}

fn project_bisection(kind: DivergenceKind, query: &ProjectionQuery) -> Result<ProjectionResult> {
    query.check()?;
    let (p, b, beta) = (&query.nominal, &query.cost, query.threshold);
    if beta >= dot(p, b) {
        return Ok(ProjectionResult::trivial());
    }
    let margin = beta - min_cost(kind, p, b);
    if margin <= 0.0 {
        return Err(Error::InfeasibleMargin { margin });
    }
    Ok(project_slices(kind, p, b, beta, query.accuracy))
}

/// `min b` over the index set the solver for `kind` works on.
pub(crate) fn min_cost(kind: DivergenceKind, nominal: &[f64], cost: &[f64]) -> f64 {
    let drop = kind.drops_zero_nominal();
    nominal
        .iter()
        .zip(cost)
        .filter(|(&q, _)| !drop || q > 0.0)
        .map(|(_, &b)| b)
        .fold(f64::INFINITY, f64::min)
}

/// Upper bound on the number of bisection steps KL and Burg need to reach
/// accuracy `delta`: `⌈log₂(width₀ · max b / (δ · min(ω, 1)))⌉ + 2`.
pub fn bisection_step_bound(initial_width: f64, max_cost: f64, delta: f64, margin: f64) -> usize {
    let ratio = initial_width * max_cost / (delta * margin.min(1.0));
    if ratio <= 1.0 {
        2
    } else {
        ratio.log2().ceil() as usize + 2
    }
}

fn solved(lower: f64, upper: f64, alpha: f64, zeta: f64, trace: Option<crate::model::BisectionTrace>) -> ProjectionResult {
    ProjectionResult {
        lower,
        upper,
        alpha: Some(alpha),
        zeta: Some(zeta),
        status: ProjectionStatus::Solved,
        trace,
    }
}

fn solved_limit(value: f64) -> ProjectionResult {
    ProjectionResult {
        lower: value,
        upper: value,
        alpha: None,
        zeta: None,
        status: ProjectionStatus::Solved,
        trace: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::dual_objective;
    use DivergenceKind::*;

    fn q(p: &[f64], b: &[f64], beta: f64, delta: f64) -> ProjectionQuery {
        ProjectionQuery::new(p.to_vec(), b.to_vec(), beta, delta).unwrap()
    }

    #[test]
    fn dispatcher_trivial_and_infeasible() {
        let r = project(Kl, &q(&[0.5, 0.5], &[0.0, 1.0], 0.6, 1e-6)).unwrap();
        assert_eq!(r.status, ProjectionStatus::Trivial);
        assert_eq!((r.lower, r.upper), (0.0, 0.0));
        for k in DivergenceKind::ALL {
            let r = project(k, &q(&[0.5, 0.5], &[1.0, 2.0], 0.5, 1e-6)).unwrap();
            assert_eq!(r.status, ProjectionStatus::Infeasible);
            assert_eq!(r.lower, f64::INFINITY);
            assert_eq!(r.upper, f64::INFINITY);
        }
    }

    #[test]
    fn variation_two_state_is_exact() {
        let r = project(Variation, &q(&[0.5, 0.5], &[0.0, 1.0], 0.25, 1e-6)).unwrap();
        assert_eq!(r.lower, 0.5);
        assert_eq!(r.upper, 0.5);
    }

    #[test]
    fn kl_remark_example() {
        let r = project_kl(&q(&[0.25, 0.75], &[1.0, 2.0], 1.5, 1e-10)).unwrap();
        let alpha = r.alpha.unwrap();
        assert!((alpha - 3f64.ln()).abs() < 1e-6, "{alpha}");
        let expected = 6f64.ln() - 1.5 * 3f64.ln();
        assert!((r.lower - expected).abs() < 1e-9 && r.upper >= expected - 1e-12);
        assert!((expected - 0.143841).abs() < 1e-6);
    }

    #[test]
    fn kl_small_threshold_approaches_vertex() {
        let r = project_kl(&q(&[0.5, 0.5], &[0.0, 1.0], 1e-4, 1e-8)).unwrap();
        assert!((r.value() - 2f64.ln()).abs() < 1e-2, "{}", r.value());
    }

    #[test]
    fn kl_margin_errors() {
        let err = project_kl(&q(&[0.5, 0.5], &[1.0, 2.0], 1.0, 1e-6)).unwrap_err();
        assert!(matches!(err, Error::InfeasibleMargin { .. }));
        assert!(project_burg(&q(&[0.5, 0.5], &[1.0, 2.0], 1.0, 1e-6)).is_err());
    }

    #[test]
    fn kl_limit_below_floor() {
        // β = min b exactly: all mass on the argmin set.
        let r = project_slices(Kl, &[0.25, 0.75], &[1.0, 2.0], 1.0, 1e-6);
        assert!((r.value() - 4f64.ln()).abs() < 1e-15);
        let r = project_slices(Burg, &[0.25, 0.75], &[1.0, 2.0], 1.0, 1e-6);
        assert_eq!(r.value(), f64::INFINITY);
    }

    #[test]
    fn burg_two_state() {
        let r = project_burg(&q(&[0.5, 0.5], &[0.0, 1.0], 0.25, 1e-10)).unwrap();
        let expected = 0.5 * (4.0f64 / 3.0).ln();
        assert!(r.lower <= expected + 1e-12 && expected <= r.upper + 1e-12);
        assert!((r.value() - 0.143841).abs() < 1e-6);
        // a* = 1/3 on the scaled interval, α* = a*/ω with ω = 0.25
        assert!((r.alpha.unwrap() - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn chi2_two_state() {
        let r = project_chi2(&q(&[0.5, 0.5], &[0.0, 1.0], 0.25, 1e-6)).unwrap();
        assert!((r.lower - 0.25).abs() < 1e-12);
        assert_eq!(r.lower, r.upper);
    }

    #[test]
    fn variation_three_state_matches_vertex_enumeration() {
        // Cheapest fix moves 0.25 mass from b = 2 to b = 0: L1 cost 0.5.
        let r = project_variation(&q(&[1.0 / 3.0; 3], &[0.0, 1.0, 2.0], 0.5, 1e-6)).unwrap();
        assert!((r.lower - 0.5).abs() < 1e-12, "{}", r.lower);
    }

    #[test]
    fn zero_nominal_entries() {
        // KL drops the zero entry: b restricted to the support is (1), β < 1 is infeasible.
        let r = project(Kl, &q(&[1.0, 0.0], &[1.0, 0.0], 0.5, 1e-6)).unwrap();
        assert_eq!(r.status, ProjectionStatus::Infeasible);
        // Burg / Variation keep it: moving half the mass to the free state.
        let r = project(Burg, &q(&[1.0, 0.0], &[1.0, 0.0], 0.5, 1e-9)).unwrap();
        assert!((r.value() - 2f64.ln()).abs() < 1e-8);
        let r = project(Variation, &q(&[1.0, 0.0], &[1.0, 0.0], 0.5, 1e-9)).unwrap();
        assert!((r.value() - 1.0).abs() < 1e-12);
        // Burg with the optimum on the a = 1 boundary.
        let r = project(Burg, &q(&[0.5, 0.5, 0.0], &[1.0, 2.0, 0.0], 0.5, 1e-9)).unwrap();
        assert!((r.value() - 1.5 * 2f64.ln()).abs() < 1e-8, "{}", r.value());
    }

    #[test]
    fn returned_duals_are_weakly_feasible() {
        let cases = [
            q(&[0.25, 0.75], &[1.0, 2.0], 1.5, 1e-8),
            q(&[0.2, 0.3, 0.5], &[0.9, 0.1, 0.6], 0.3, 1e-8),
            q(&[0.1, 0.6, 0.3], &[0.0, 0.5, 1.0], 0.2, 1e-8),
        ];
        for query in &cases {
            for k in DivergenceKind::ALL {
                let r = project(k, query).unwrap();
                let d = dual_objective(k, r.alpha.unwrap(), r.zeta.unwrap(), query).unwrap();
                assert!(d <= r.upper + 1e-9, "{k}: dual {d} > upper {}", r.upper);
                assert!(d >= r.lower - 1e-6, "{k}: dual {d} far below lower {}", r.lower);
            }
        }
    }

    #[test]
    fn step_bound() {
        assert_eq!(bisection_step_bound(1.0, 1.0, 1.0, 1.0), 2);
        assert_eq!(bisection_step_bound(1.0, 1.0, 0.25, 1.0), 4);
        assert_eq!(bisection_step_bound(1.0, 1.0, 0.25, 0.5), 5);
    }
}

use super::solved;
use crate::model::ProjectionResult;

/// Exact solve, requires `min b ≤ β < p̄ᵀb`.
///
/// After eliminating ζ the dual is
/// `f(α) = 2 + α(m − β) − Σ p̄ [2 + α(m − b)]₊` with `m = min b`, concave and
/// piecewise linear with breakpoints `2/(b − m)`; its maximum sits at `0` or
/// at a breakpoint.
pub(super) fn solve(nominal: &[f64], cost: &[f64], beta: f64) -> ProjectionResult {
    let m = cost.iter().copied().fold(f64::INFINITY, f64::min);
    let mut candidates: Vec<f64> = std::iter::once(0.0)
        .chain(
            nominal
                .iter()
                .zip(cost)
                .filter(|(&q, &b)| q > 0.0 && b > m)
                .map(|(_, &b)| 2.0 / (b - m)),
        )
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let f = |alpha: f64| -> f64 {
        let hinge: f64 = nominal
            .iter()
            .zip(cost)
            .filter(|(&q, _)| q > 0.0)
            .map(|(&q, &b)| q * (2.0 + alpha * (m - b)).max(0.0))
            .sum();
        2.0 + alpha * (m - beta) - hinge
    };

    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if f(candidates[mid]) < f(candidates[mid + 1]) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let alpha = candidates[lo];
    let value = f(alpha).max(0.0);
    solved(value, value, alpha, 1.0 + alpha * m, None)
}

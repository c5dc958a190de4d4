use super::{solved, solved_limit, MAX_BISECTION_STEPS, OMEGA_FLOOR};
use crate::model::{BisectionTrace, ProjectionResult};

/// Requires `min b ≤ β < p̄ᵀb`; `min b` ranges over all indices, including
/// those with zero nominal mass.
pub(super) fn solve(nominal: &[f64], cost: &[f64], beta: f64, delta: f64) -> ProjectionResult {
    let m = cost.iter().copied().fold(f64::INFINITY, f64::min);
    let bmax = cost.iter().copied().fold(0.0, f64::max);
    let omega = beta - m;
    if omega < OMEGA_FLOOR {
        // p must vanish wherever b > min b while p̄ > 0 there.
        return solved_limit(f64::INFINITY);
    }

    let g = Scaled { nominal, cost, beta, omega };
    let tol = delta * omega / bmax;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut steps = 0;
    while hi - lo > tol && steps < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        steps += 1;
        let slope = g.slope(mid);
        if slope > 0.0 {
            lo = mid;
        } else if slope < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
    }

    let g_lo = g.value(lo);
    let gap = bmax / omega * (hi - lo);
    let upper = g_lo + if gap <= delta * (1.0 + 1e-9) { gap.min(delta) } else { gap };
    // Undo the scaling a = (β − min b) α; the paired ζ is αβ.
    let a = 0.5 * (lo + hi);
    let alpha = a / omega;
    let trace = BisectionTrace { iterations: steps, initial_width: 1.0, lower: lo, upper: hi };
    solved(g_lo, upper, alpha, alpha * beta, Some(trace))
}

/// `g(a) = Σ p̄ log(1 + a (b − β)/ω)` on `a ∈ [0, 1)`, with `ω = β − min b`.
struct Scaled<'a> {
    nominal: &'a [f64],
    cost: &'a [f64],
    beta: f64,
    omega: f64,
}

impl Scaled<'_> {
    fn value(&self, a: f64) -> f64 {
        self.nominal
            .iter()
            .zip(self.cost)
            .filter(|(&q, _)| q > 0.0)
            .map(|(&q, &b)| q * (a * (b - self.beta) / self.omega).ln_1p())
            .sum()
    }

    fn slope(&self, a: f64) -> f64 {
        self.nominal
            .iter()
            .zip(self.cost)
            .filter(|(&q, _)| q > 0.0)
            .map(|(&q, &b)| {
                let d = b - self.beta;
                q * d / (self.omega + a * d)
            })
            .sum()
    }
}

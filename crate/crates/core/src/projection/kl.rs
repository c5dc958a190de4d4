use super::{solved, solved_limit, MAX_BISECTION_STEPS, OMEGA_FLOOR};
use crate::model::{BisectionTrace, ProjectionResult};

/// Requires `min b ≤ β < p̄ᵀb` over the support of `nominal`.
pub(super) fn solve(nominal: &[f64], cost: &[f64], beta: f64, delta: f64) -> ProjectionResult {
    let mut m = f64::INFINITY;
    let mut bmax = 0.0f64;
    let mut pmin = f64::INFINITY;
    for (&q, &b) in nominal.iter().zip(cost) {
        if q > 0.0 {
            m = m.min(b);
            bmax = bmax.max(b);
            pmin = pmin.min(q);
        }
    }
    let omega = beta - m;
    if omega < OMEGA_FLOOR {
        // All mass on argmin b: KL(p‖p̄) = −log p̄(argmin).
        let mass: f64 = nominal.iter().zip(cost).filter(|(&q, &b)| q > 0.0 && b == m).map(|(q, _)| q).sum();
        return solved_limit(-mass.ln());
    }

    let objective = Shifted { nominal, cost, m, omega };
    let width0 = (1.0 / pmin).ln() / omega;
    let tol = delta / bmax;
    let (mut lo, mut hi) = (0.0, width0);
    let mut steps = 0;
    while hi - lo > tol && steps < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        steps += 1;
        let (_, slope) = objective.eval(mid);
        if slope > 0.0 {
            lo = mid;
        } else if slope < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
    }

    let (f_lo, _) = objective.eval(lo);
    let gap = bmax * (hi - lo);
    // Rounding in bmax·(hi−lo) may exceed δ by an ulp.
    let upper = f_lo + if gap <= delta * (1.0 + 1e-9) { gap.min(delta) } else { gap };
    let alpha = 0.5 * (lo + hi);
    let trace = BisectionTrace { iterations: steps, initial_width: width0, lower: lo, upper: hi };
    solved(f_lo, upper, alpha, objective.zeta(alpha), Some(trace))
}

/// `f(α) = −α(β − m) − log Σ p̄ e^{−α(b − m)}`, the KL dual after the inner
/// maximization over ζ. Shifting by `m = min b` keeps every exponent ≤ 0.
struct Shifted<'a> {
    nominal: &'a [f64],
    cost: &'a [f64],
    m: f64,
    omega: f64,
}

impl Shifted<'_> {
    /// Returns `(f(α), f'(α))`.
    fn eval(&self, alpha: f64) -> (f64, f64) {
        let mut z = 0.0;
        let mut zb = 0.0;
        for (&q, &b) in self.nominal.iter().zip(self.cost) {
            if q > 0.0 {
                let d = b - self.m;
                let w = q * (-alpha * d).exp();
                z += w;
                zb += w * d;
            }
        }
        (-alpha * self.omega - z.ln(), zb / z - self.omega)
    }

    /// `ζ*(α) = −log Σ p̄ e^{−αb}`
    fn zeta(&self, alpha: f64) -> f64 {
        let z: f64 = self
            .nominal
            .iter()
            .zip(self.cost)
            .filter(|(&q, _)| q > 0.0)
            .map(|(&q, &b)| q * (-alpha * (b - self.m)).exp())
            .sum();
        alpha * self.m - z.ln()
    }
}

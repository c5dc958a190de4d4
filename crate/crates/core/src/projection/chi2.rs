use super::solved;
use crate::divergence::dual_objective_raw;
use crate::model::{DivergenceKind, ProjectionResult};

/// Exact solve over the support of `nominal`, requires `min b ≤ β < p̄ᵀb`.
///
/// With `u = ζ + 2` the dual reads
/// `g(α, u) = −βα + u − 1 − ¼ Σ p̄ ([u − αb]₊)²`.
/// Sorting `b` in decreasing order, each split `k` fixes the active set
/// `T = {i ≥ k}` where `u > α bᵢ`. Within a split `g` is a concave quadratic
/// in `α` once `u` is optimized, either in the interior
/// (`u = (2 + B α)/P`) or on one of the two box faces `u = α b_k`,
/// `u = α b_{k−1}`. The best of these closed forms is the dual optimum.
pub(super) fn solve(nominal: &[f64], cost: &[f64], beta: f64) -> ProjectionResult {
    let mut pts: Vec<(f64, f64)> = nominal
        .iter()
        .zip(cost)
        .filter(|(&q, _)| q > 0.0)
        .map(|(&q, &b)| (b, q))
        .collect();
    pts.sort_by(|x, y| y.0.total_cmp(&x.0));
    let n = pts.len();

    // Suffix sums P, B, C of p̄, p̄b, p̄b² over the tail.
    let mut suffix = vec![(0.0, 0.0, 0.0); n + 1];
    for k in (0..n).rev() {
        let (b, q) = pts[k];
        let (p, s1, s2) = suffix[k + 1];
        suffix[k] = (p + q, s1 + q * b, s2 + q * b * b);
    }

    // α = 0, u = 0 is always dual feasible with value 0.
    let mut best = Candidate { value: 0.0, alpha: 0.0, u: 2.0 };
    for k in 0..n {
        let (p, s1, s2) = suffix[k];
        let b_lo = pts[k].0;
        let b_hi = if k > 0 { Some(pts[k - 1].0) } else { None };
        let c1 = b_lo * p - s1;
        let c2 = b_hi.map(|bh| bh * p - s1);

        // Interior: u = (2 + s1 α)/p, valid while α b_lo ≤ u ≤ α b_hi.
        let lo = match c2 {
            None => Some(0.0),
            Some(c) if c > 0.0 => Some(2.0 / c),
            Some(_) => None,
        };
        if let Some(lo) = lo {
            let hi = if c1 > 0.0 { 2.0 / c1 } else { f64::INFINITY };
            if lo <= hi {
                let quad = Quadratic {
                    c0: -1.0 + 1.0 / p,
                    c1: s1 / p - beta,
                    c2: 0.25 * (s1 * s1 / p - s2),
                };
                if let Some(alpha) = quad.argmax(lo, hi) {
                    best.offer(quad.at(alpha), alpha, (2.0 + s1 * alpha) / p);
                }
            }
        }

        // Face u = α b_lo, valid for α ≥ 2/c1.
        if c1 > 0.0 {
            let quad = face(b_lo, p, s1, s2, beta);
            if let Some(alpha) = quad.argmax(2.0 / c1, f64::INFINITY) {
                best.offer(quad.at(alpha), alpha, alpha * b_lo);
            }
        }

        // Face u = α b_hi, valid for α ≤ 2/c2.
        if let (Some(bh), Some(c)) = (b_hi, c2) {
            let hi = if c > 0.0 { 2.0 / c } else { f64::INFINITY };
            let quad = face(bh, p, s1, s2, beta);
            if let Some(alpha) = quad.argmax(0.0, hi) {
                best.offer(quad.at(alpha), alpha, alpha * bh);
            }
        }
    }

    let zeta = best.u - 2.0;
    // Re-evaluate the chosen dual point directly; the closed forms only pick it.
    let value = dual_objective_raw(DivergenceKind::ChiSquared, best.alpha, zeta, nominal, cost, beta).max(0.0);
    solved(value, value, best.alpha, zeta, None)
}

struct Candidate {
    value: f64,
    alpha: f64,
    u: f64,
}

impl Candidate {
    fn offer(&mut self, value: f64, alpha: f64, u: f64) {
        if value > self.value {
            *self = Candidate { value, alpha, u };
        }
    }
}

/// `g(α, α c)` for the face `u = α c`:
/// `−1 + α(c − β) − (α²/4) Σ_T p̄ (c − bᵢ)²`.
fn face(c: f64, p: f64, s1: f64, s2: f64, beta: f64) -> Quadratic {
    let spread = (c * c * p - 2.0 * c * s1 + s2).max(0.0);
    Quadratic { c0: -1.0, c1: c - beta, c2: -0.25 * spread }
}

/// `c0 + c1 α + c2 α²` with `c2 ≤ 0`.
struct Quadratic {
    c0: f64,
    c1: f64,
    c2: f64,
}

impl Quadratic {
    fn at(&self, alpha: f64) -> f64 {
        self.c0 + alpha * (self.c1 + alpha * self.c2)
    }

    fn argmax(&self, lo: f64, hi: f64) -> Option<f64> {
        let c2 = self.c2.min(0.0);
        if c2 < 0.0 {
            Some((-self.c1 / (2.0 * c2)).clamp(lo, hi))
        } else if self.c1 > 0.0 {
            hi.is_finite().then_some(hi)
        } else {
            Some(lo)
        }
    }
}

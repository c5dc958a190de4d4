//! φ-divergences, their convex conjugates, and the bivariate dual objective
//! of the generalized projection.
//!
//! | kind      | φ(t)              | φ*(y)                                  |
//! |-----------|-------------------|----------------------------------------|
//! | KL        | t log t − t + 1   | eʸ − 1                                 |
//! | Burg      | −log t + t − 1    | −log(1 − y), y < 1                     |
//! | Variation | \|t − 1\|         | max(−1, y), y ≤ 1                      |
//! | χ²        | (t − 1)²          | y + y²/4 for y ≥ −2, −1 otherwise      |

use crate::error::{Error, Result};
use crate::model::{DivergenceKind, ProjectionQuery};

/// Value of a convex conjugate; `+∞` outside its effective domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateValue {
    pub value: f64,
    pub in_domain: bool,
}

impl ConjugateValue {
    fn finite(value: f64) -> Self {
        ConjugateValue { value, in_domain: true }
    }

    const OUT: ConjugateValue = ConjugateValue { value: f64::INFINITY, in_domain: false };
}

/// `φ(t)` for `t ≥ 0`; `φ(0)` is the right limit.
pub fn phi(kind: DivergenceKind, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("phi requires t >= 0, got {t}")));
    }
    Ok(match kind {
        DivergenceKind::Kl => {
            if t == 0.0 {
                1.0
            } else {
                t * t.ln() - t + 1.0
            }
        }
        DivergenceKind::Burg => {
            if t == 0.0 {
                f64::INFINITY
            } else {
                -t.ln() + t - 1.0
            }
        }
        DivergenceKind::Variation => (t - 1.0).abs(),
        DivergenceKind::ChiSquared => (t - 1.0) * (t - 1.0),
    })
}

/// `φ*(y) = sup_{t ≥ 0} y t − φ(t)`.
pub fn phi_conjugate(kind: DivergenceKind, y: f64) -> ConjugateValue {
    match kind {
        DivergenceKind::Kl => ConjugateValue::finite(y.exp_m1()),
        DivergenceKind::Burg => {
            if y < 1.0 {
                ConjugateValue::finite(-(-y).ln_1p())
            } else {
                ConjugateValue::OUT
            }
        }
        DivergenceKind::Variation => {
            if y <= 1.0 {
                ConjugateValue::finite(y.max(-1.0))
            } else {
                ConjugateValue::OUT
            }
        }
        DivergenceKind::ChiSquared => {
            if y >= -2.0 {
                ConjugateValue::finite(y + 0.25 * y * y)
            } else {
                ConjugateValue::finite(-1.0)
            }
        }
    }
}

/// `d(p, p̄) = Σ p̄ φ(p / p̄)`.
///
/// Entries with `p̄ = 0` contribute `+∞` for KL and χ² when `p > 0`, and `p`
/// (the recession slope of φ) for Burg and Variation.
pub fn divergence(kind: DivergenceKind, p: &[f64], nominal: &[f64]) -> Result<f64> {
    if p.len() != nominal.len() {
        return Err(Error::InvalidArgument(format!(
            "distributions have unequal lengths {} and {}",
            p.len(),
            nominal.len()
        )));
    }
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(nominal) {
        if qi > 0.0 {
            total += qi * phi(kind, pi / qi)?;
        } else if pi > 0.0 {
            match kind {
                DivergenceKind::Kl | DivergenceKind::ChiSquared => return Ok(f64::INFINITY),
                DivergenceKind::Burg | DivergenceKind::Variation => total += pi,
            }
        } else if pi < 0.0 {
            return Err(Error::Domain(format!("negative probability {pi}")));
        }
        if total == f64::INFINITY {
            return Ok(total);
        }
    }
    Ok(total.max(0.0))
}

/// Dual objective `−βα + ζ − Σ p̄ φ*(−α b + ζ)` of the projection; every
/// evaluation is a lower bound on the projection value.
///
/// Returns `−∞` when a conjugate argument leaves its domain. For Burg and
/// Variation, indices with `p̄ = 0` still restrict `−α b + ζ ≤ 1`; for KL and χ²
/// they are dropped and contribute nothing.
pub fn dual_objective(kind: DivergenceKind, alpha: f64, zeta: f64, query: &ProjectionQuery) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::Domain(format!("dual multiplier alpha must be >= 0, got {alpha}")));
    }
    Ok(dual_objective_raw(kind, alpha, zeta, &query.nominal, &query.cost, query.threshold))
}

pub(crate) fn dual_objective_raw(
    kind: DivergenceKind,
    alpha: f64,
    zeta: f64,
    nominal: &[f64],
    cost: &[f64],
    beta: f64,
) -> f64 {
    // fma keeps −βα + ζ and ζ − α b accurate when α is large.
    let mut total = (-beta).mul_add(alpha, zeta);
    let mut comp = 0.0;
    for (&q, &b) in nominal.iter().zip(cost) {
        let y = (-alpha).mul_add(b, zeta);
        if q > 0.0 {
            let c = phi_conjugate(kind, y);
            if !c.in_domain {
                return f64::NEG_INFINITY;
            }
            // Kahan summation of −p̄ φ*(y).
            let term = -q * c.value - comp;
            let t = total + term;
            comp = (t - total) - term;
            total = t;
        } else if !kind.drops_zero_nominal() && y > 1.0 {
            return f64::NEG_INFINITY;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use DivergenceKind::*;

    #[test]
    fn phi_values() {
        for k in DivergenceKind::ALL {
            assert_eq!(phi(k, 1.0).unwrap(), 0.0);
        }
        assert_eq!(phi(Variation, 3.0).unwrap(), 2.0);
        assert!((phi(Kl, 2.0).unwrap() - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((phi(Kl, 2.0).unwrap() - 0.386294).abs() < 1e-6);
        assert_eq!(phi(Kl, 0.0).unwrap(), 1.0);
        assert_eq!(phi(Burg, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(phi(Variation, 0.0).unwrap(), 1.0);
        assert_eq!(phi(ChiSquared, 0.0).unwrap(), 1.0);
        assert!(phi(Kl, -0.1).is_err());
    }

    #[test]
    fn conjugate_values() {
        assert_eq!(phi_conjugate(Kl, 0.0).value, 0.0);
        let c = phi_conjugate(Burg, 1.0);
        assert!(!c.in_domain && c.value == f64::INFINITY);
        assert_eq!(phi_conjugate(ChiSquared, -3.0).value, -1.0);
        assert_eq!(phi_conjugate(ChiSquared, -2.0).value, -1.0);
        assert_eq!(phi_conjugate(Variation, 1.0), ConjugateValue { value: 1.0, in_domain: true });
        assert!(!phi_conjugate(Variation, 1.0 + 1e-12).in_domain);
        assert_eq!(phi_conjugate(Variation, -5.0).value, -1.0);
        assert!((phi_conjugate(Burg, 0.5).value - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn divergence_values() {
        let pbar = [0.5, 0.5];
        for k in DivergenceKind::ALL {
            assert_eq!(divergence(k, &pbar, &pbar).unwrap(), 0.0);
        }
        assert_eq!(divergence(Variation, &[1.0, 0.0], &pbar).unwrap(), 1.0);
        let kl = divergence(Kl, &[0.75, 0.25], &pbar).unwrap();
        assert!((kl - (0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln())).abs() < 1e-15);
        assert!((kl - 0.130812).abs() < 1e-6);
        assert!(divergence(Kl, &[1.0], &pbar).is_err());
        assert_eq!(divergence(Burg, &[1.0, 0.0], &pbar).unwrap(), f64::INFINITY);
        // support leaving p̄
        assert_eq!(divergence(Kl, &[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert_eq!(divergence(ChiSquared, &[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!((divergence(Variation, &[0.5, 0.5], &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((divergence(Burg, &[0.5, 0.5], &[1.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn dual_objective_values() {
        let q = ProjectionQuery::new(vec![0.25, 0.75], vec![1.0, 2.0], 1.5, 1e-6).unwrap();
        assert_eq!(dual_objective(Kl, 0.0, 0.0, &q).unwrap(), 0.0);
        let v = dual_objective(Kl, 3f64.ln(), -(1.0f64 / 6.0).ln(), &q).unwrap();
        assert!((v - (6f64.ln() - 1.5 * 3f64.ln())).abs() < 1e-12);
        assert!((v - 0.143841).abs() < 1e-6);
        // −α b + ζ ≥ 1 at b = 1 when α = 1, ζ = 2
        assert_eq!(dual_objective(Burg, 1.0, 2.0, &q).unwrap(), f64::NEG_INFINITY);
        assert!(dual_objective(Kl, -1.0, 0.0, &q).is_err());
    }

    #[test]
    fn zero_nominal_keeps_domain_for_variation() {
        // p̄ = (1, 0), b = (1, 0), β = 0.5 has value 1; ζ beyond 1 + α·0 must be rejected.
        let q = ProjectionQuery::new(vec![1.0, 0.0], vec![1.0, 0.0], 0.5, 1e-6).unwrap();
        assert_eq!(dual_objective(Variation, 4.0, 5.0, &q).unwrap(), f64::NEG_INFINITY);
        assert!(dual_objective(Variation, 2.0, 1.0, &q).unwrap() <= 1.0 + 1e-15);
    }
}

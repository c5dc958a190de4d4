use proptest::prelude::*;
use rmdp::instancegen::random_projection_instance;
use rmdp::oracle::{grid_slack, oracle_dual_scan_default, oracle_project_grid};
use rmdp::projection::bisection_step_bound;
use rmdp::{dual_objective, project, DivergenceKind, ProjectionQuery, ProjectionStatus};

fn kind() -> impl Strategy<Value = DivergenceKind> {
    prop::sample::select(DivergenceKind::ALL.to_vec())
}

/// A non-trivial query: positive nominal, threshold strictly between
/// `min b` and `p̄ᵀb` (position `t` along that interval).
fn query(max_states: usize) -> impl Strategy<Value = ProjectionQuery> {
    (2..=max_states)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.02f64..1.0, n),
                prop::collection::vec(0.0f64..1.0, n),
                0.01f64..0.99,
                prop::sample::select(vec![1e-4, 1e-6, 1e-9]),
            )
        })
        .prop_filter_map("flat cost", |(u, b, t, delta)| {
            let s: f64 = u.iter().sum();
            let p: Vec<f64> = u.iter().map(|x| x / s).collect();
            let m = b.iter().copied().fold(f64::INFINITY, f64::min);
            let nc: f64 = p.iter().zip(&b).map(|(p, b)| p * b).sum();
            (nc - m > 1e-3).then(|| ProjectionQuery::new(p, b, m + t * (nc - m), delta).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sandwich(kind in kind(), q in query(3)) {
        let h = 1.0 / 150.0;
        let r = project(kind, &q).unwrap();
        prop_assert_eq!(r.status, ProjectionStatus::Solved);
        let lb = oracle_dual_scan_default(kind, &q);
        let ub = oracle_project_grid(kind, &q, h).unwrap() + grid_slack(kind, &q, h);
        prop_assert!(lb - 1e-9 <= r.lower, "{kind}: dual scan {lb} > lower {}", r.lower);
        prop_assert!(r.lower <= r.upper);
        prop_assert!(r.upper <= ub, "{kind}: upper {} > grid {ub}", r.upper);
    }

    #[test]
    fn delta_contract(kind in kind(), q in query(40)) {
        let r = project(kind, &q).unwrap();
        if kind.is_exact() {
            prop_assert_eq!(r.lower, r.upper);
        } else {
            prop_assert!(r.upper - r.lower <= q.accuracy);
        }
    }

    #[test]
    fn returned_dual_is_a_lower_bound(kind in kind(), q in query(40)) {
        let r = project(kind, &q).unwrap();
        let d = dual_objective(kind, r.alpha.unwrap(), r.zeta.unwrap(), &q).unwrap();
        prop_assert!(d <= r.upper + 1e-9, "{kind}: dual {d} > upper {}", r.upper);
    }

    #[test]
    fn monotone_in_threshold(kind in kind(), q in query(20), steps in prop::collection::vec(0.0f64..1.0, 6)) {
        let m = q.cost.iter().copied().fold(f64::INFINITY, f64::min);
        let span = q.nominal_cost() - m;
        let mut ts = steps;
        ts.sort_by(f64::total_cmp);
        let mut prev: Option<f64> = None;
        for t in ts {
            let mut qt = q.clone();
            qt.threshold = m + 1e-6 * span + t * span;
            let v = project(kind, &qt).unwrap().value();
            if let Some(p) = prev {
                prop_assert!(p >= v - 2.0 * q.accuracy, "{kind}: {p} then {v}");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn bisection_steps_bounded(kind in prop::sample::select(vec![DivergenceKind::Kl, DivergenceKind::Burg]), q in query(40)) {
        let r = project(kind, &q).unwrap();
        let trace = r.trace.unwrap();
        let m = q.cost.iter().copied().fold(f64::INFINITY, f64::min);
        let max_b = q.cost.iter().copied().fold(0.0, f64::max);
        let bound = bisection_step_bound(trace.initial_width, max_b, q.accuracy, q.threshold - m);
        prop_assert!(trace.iterations <= bound, "{} > {bound}", trace.iterations);
    }

    #[test]
    fn trivial_and_infeasible_branches(kind in kind(), q in query(10)) {
        let mut above = q.clone();
        above.threshold = q.nominal_cost() + 0.1;
        prop_assert_eq!(project(kind, &above).unwrap().status, ProjectionStatus::Trivial);
        let mut below = q.clone();
        below.threshold = q.cost.iter().copied().fold(f64::INFINITY, f64::min);
        below.cost.iter_mut().for_each(|b| *b += 0.1);
        let r = project(kind, &below).unwrap();
        prop_assert_eq!(r.status, ProjectionStatus::Infeasible);
        prop_assert!(r.lower.is_infinite());
    }
}

#[test]
fn chi2_matches_fine_grid() {
    let k = DivergenceKind::ChiSquared;
    let q = random_projection_instance(3, 0).unwrap();
    let exact = project(k, &q).unwrap().lower;
    assert!((oracle_project_grid(k, &q, 1.0 / 200.0).unwrap() - exact).abs() <= 0.02);
    for seed in 0..20 {
        let q = random_projection_instance(3, seed).unwrap();
        let exact = project(k, &q).unwrap().lower;
        assert!((oracle_dual_scan_default(k, &q) - exact).abs() <= 1e-6);
        let coarse = oracle_project_grid(k, &q, 1.0 / 200.0).unwrap();
        let fine = oracle_project_grid(k, &q, 1.0 / 800.0).unwrap();
        assert!(exact - 1e-12 <= fine && fine <= coarse, "{exact} {fine} {coarse}");
        assert!(coarse - exact <= grid_slack(k, &q, 1.0 / 200.0));
    }
}

#[test]
fn variation_three_state_example() {
    // Optimal plan: move 1/4 of the mass from the costliest state to the cheapest.
    let q = ProjectionQuery::new(vec![1.0 / 3.0; 3], vec![0.0, 1.0, 2.0], 0.5, 1e-9).unwrap();
    let r = project(DivergenceKind::Variation, &q).unwrap();
    assert!((r.lower - 0.5).abs() < 1e-12);
    let grid = oracle_project_grid(DivergenceKind::Variation, &q, 1.0 / 12.0).unwrap();
    assert!((grid - 0.5).abs() < 1e-12);
    assert!((oracle_dual_scan_default(DivergenceKind::Variation, &q) - 0.5).abs() < 1e-6);
}

#[test]
fn burg_example() {
    let q = ProjectionQuery::new(vec![0.5, 0.5], vec![0.0, 1.0], 0.25, 1e-10).unwrap();
    let r = project(DivergenceKind::Burg, &q).unwrap();
    let want = 0.5 * (4.0f64 / 3.0).ln();
    assert!(r.lower <= want + 1e-12 && want <= r.upper + 1e-12);
}

#[test]
fn kl_example() {
    let q = ProjectionQuery::new(vec![0.25, 0.75], vec![1.0, 2.0], 1.5, 1e-10).unwrap();
    let r = project(DivergenceKind::Kl, &q).unwrap();
    assert!((r.alpha.unwrap() - 3.0f64.ln()).abs() < 1e-6);
    let want = -1.5 * 3.0f64.ln() + 6.0f64.ln();
    assert!((r.value() - want).abs() < 1e-9);
}

use proptest::prelude::*;
use rmdp::instancegen::{random_rmdp, DEFAULT_DISCOUNT};
use rmdp::oracle::oracle_bellman;
use rmdp::{
    evaluate_policy_robust, extract_policy, nominal_bellman, robust_bellman, robust_bellman_state,
    robust_value_iteration, DivergenceKind, InstanceData, MdpInstance, Policy, ValueVector,
};

const EPS: f64 = 1e-4;

fn kind() -> impl Strategy<Value = DivergenceKind> {
    prop::sample::select(DivergenceKind::ALL.to_vec())
}

fn instance(states: usize, actions: usize) -> impl Strategy<Value = MdpInstance> {
    (kind(), any::<u64>()).prop_map(move |(k, seed)| random_rmdp(states, actions, seed, DEFAULT_DISCOUNT, k).unwrap())
}

fn unit_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n)
}

fn scaled(u: &[f64], scale: f64) -> ValueVector {
    ValueVector(u.iter().map(|x| x * scale).collect())
}

fn bellman(inst: &MdpInstance, v: &ValueVector) -> ValueVector {
    robust_bellman(inst, v, EPS).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction(inst in instance(4, 3), u in unit_vector(4), w in unit_vector(4)) {
        let r = inst.value_upper_bound();
        let (v, w) = (scaled(&u, r), scaled(&w, r));
        let gap = bellman(&inst, &v).max_abs_diff(&bellman(&inst, &w));
        prop_assert!(gap <= inst.discount() * v.max_abs_diff(&w) + 2.0 * EPS);
    }

    #[test]
    fn monotone(inst in instance(4, 3), u in unit_vector(4), d in unit_vector(4)) {
        let r = inst.value_upper_bound();
        let v = scaled(&u, 0.5 * r);
        let w = ValueVector(v.iter().zip(&d).map(|(x, d)| x + 0.5 * r * d).collect());
        let (jv, jw) = (bellman(&inst, &v), bellman(&inst, &w));
        for (a, b) in jv.iter().zip(jw.iter()) {
            prop_assert!(a <= &(b + 2.0 * EPS));
        }
    }

    #[test]
    fn constant_shift(inst in instance(4, 2), u in unit_vector(4), c in 0.0f64..1.0) {
        let r = inst.value_upper_bound();
        let v = scaled(&u, 0.5 * r);
        let shift = 0.5 * r * c;
        let w = ValueVector(v.iter().map(|x| x + shift).collect());
        let (jv, jw) = (bellman(&inst, &v), bellman(&inst, &w));
        for (a, b) in jv.iter().zip(jw.iter()) {
            prop_assert!((b - a - inst.discount() * shift).abs() <= 2.0 * EPS, "{a} + λ{shift} vs {b}");
        }
    }

    #[test]
    fn larger_budget_lowers_value(inst in instance(3, 3), u in unit_vector(3), extra in 0.0f64..2.0) {
        let v = scaled(&u, inst.value_upper_bound());
        let wider = inst.with_kappa(inst.kappa() + extra).unwrap();
        let (small, large) = (bellman(&inst, &v), bellman(&wider, &v));
        for (a, b) in small.iter().zip(large.iter()) {
            prop_assert!(*a >= b - 2.0 * EPS);
        }
    }

    #[test]
    fn robust_below_nominal(inst in instance(4, 3), u in unit_vector(4)) {
        let v = scaled(&u, inst.value_upper_bound());
        let (j, t) = (bellman(&inst, &v), nominal_bellman(&inst, &v));
        for (a, b) in j.iter().zip(t.iter()) {
            prop_assert!(*a <= b + EPS);
        }
    }

    #[test]
    fn zero_budget_is_nominal(inst in instance(3, 3), u in unit_vector(3)) {
        let inst = inst.with_kappa(0.0).unwrap();
        let v = scaled(&u, inst.value_upper_bound());
        prop_assert!(bellman(&inst, &v).max_abs_diff(&nominal_bellman(&inst, &v)) <= EPS);
    }

    #[test]
    fn scheduling_does_not_change_results(inst in instance(6, 3), u in unit_vector(6)) {
        let v = scaled(&u, inst.value_upper_bound());
        prop_assert_eq!(bellman(&inst, &v), bellman(&inst, &v));
        let states: Vec<f64> = (0..6).map(|s| robust_bellman_state(&inst, &v, s, EPS).unwrap().value).collect();
        prop_assert_eq!(states, bellman(&inst, &v).0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn value_iteration_decays_geometrically(inst in instance(3, 2)) {
        let eps = 1e-3;
        let report = robust_value_iteration(&inst, eps, 100_000).unwrap();
        prop_assert!(report.converged);
        let (lambda, r) = (inst.discount(), inst.value_upper_bound());
        for (t, res) in report.history.iter().enumerate() {
            prop_assert!(*res <= lambda.powi(t as i32) * r + 4.0 * eps, "t={t}: {res}");
        }
        let fixed = bellman(&inst, &report.values);
        prop_assert!(fixed.max_abs_diff(&report.values) <= 2.0 * eps);
    }

    #[test]
    fn extracted_policy_is_nearly_optimal(inst in instance(3, 2)) {
        let eps = 1e-3;
        let vi = robust_value_iteration(&inst, eps, 100_000).unwrap();
        let policy = extract_policy(&inst, &vi.values, eps).unwrap();
        policy.check().unwrap();
        let pv = evaluate_policy_robust(&inst, &policy, eps).unwrap();
        prop_assert!(pv.converged);
        for (a, b) in pv.values.iter().zip(vi.values.iter()) {
            prop_assert!(*a >= b - 4.0 * eps, "policy value {a} < v* {b} - 4ε");
        }
    }

    #[test]
    fn single_action_evaluation_matches_value_iteration(inst in instance(3, 1)) {
        let eps = 1e-3;
        let vi = robust_value_iteration(&inst, eps, 100_000).unwrap();
        let pv = evaluate_policy_robust(&inst, &Policy::deterministic(1, &[0, 0, 0]), eps).unwrap();
        prop_assert!(!pv.upper_approximation);
        prop_assert!(pv.values.max_abs_diff(&vi.values) <= 2.0 * eps);
    }
}

#[test]
fn uniform_policy_on_symmetric_instance() {
    // State 1 mirrors state 0 with the successor states swapped.
    let (x, r) = ([0.3, 0.7, 0.6, 0.4], [0.2, 0.9, 0.5, 0.1]);
    let mut nominal = Vec::new();
    let mut rewards = Vec::new();
    for s in 0..2 {
        for a in 0..2 {
            let (p, q) = (x[2 * a], x[2 * a + 1]);
            let (r0, r1) = (r[2 * a], r[2 * a + 1]);
            if s == 0 {
                nominal.extend([p, q]);
                rewards.extend([r0, r1]);
            } else {
                nominal.extend([q, p]);
                rewards.extend([r1, r0]);
            }
        }
    }
    for kind in DivergenceKind::ALL {
        let inst = MdpInstance::new(InstanceData {
            states: 2,
            actions: 2,
            discount: 0.9,
            kappa: 0.2,
            divergence: kind,
            rewards: rewards.clone(),
            nominal: nominal.clone(),
            initial_dist: None,
        })
        .unwrap();
        let uniform = Policy { states: 2, actions: 2, probabilities: vec![0.5; 4] };
        let pv = evaluate_policy_robust(&inst, &uniform, 1e-5).unwrap();
        assert!(pv.upper_approximation);
        assert!((pv.values[0] - pv.values[1]).abs() <= 2e-5, "{kind}: {:?}", pv.values);
        let vi = robust_value_iteration(&inst, 1e-5, 100_000).unwrap();
        assert!((vi.values[0] - vi.values[1]).abs() <= 2e-5);
    }
}

#[test]
fn three_by_three_inside_oracle_bracket() {
    for (i, kind) in DivergenceKind::ALL.into_iter().enumerate() {
        let inst = random_rmdp(3, 3, 900 + i as u64, DEFAULT_DISCOUNT, kind).unwrap();
        let v = ValueVector(vec![0.3, 5.0, 11.0]);
        let out = robust_bellman_state(&inst, &v, 1, 1e-3).unwrap();
        let bracket = oracle_bellman(&inst, &v, 1, 1e-3).unwrap();
        assert!(bracket.contains(out.value), "{kind}: {} vs {bracket:?}", out.value);
    }
}

use rmdp::instancegen::{mix_seed, random_bellman_state, random_projection_instance, random_rmdp, RNG_ALGORITHM, THRESHOLD_MARGIN};
use rmdp::{project, DivergenceKind, ProjectionStatus};

#[test]
fn generated_queries_are_never_trivial_or_infeasible() {
    for seed in 0..300 {
        let q = random_projection_instance(2 + (seed % 20) as usize, seed).unwrap();
        let m = q.cost.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(q.threshold > m + THRESHOLD_MARGIN && q.threshold < q.nominal_cost() - THRESHOLD_MARGIN);
        assert!((q.nominal.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for kind in DivergenceKind::ALL {
            assert_eq!(project(kind, &q).unwrap().status, ProjectionStatus::Solved);
        }
    }
}

#[test]
fn cost_components_are_uniform() {
    let n = 10_000;
    let mut sums = [0.0; 3];
    for i in 0..n {
        let q = random_projection_instance(3, mix_seed(77, i, 0)).unwrap();
        for (s, b) in sums.iter_mut().zip(&q.cost) {
            *s += b;
        }
    }
    for s in sums {
        let mean = s / n as f64;
        assert!((0.48..=0.52).contains(&mean), "{mean}");
    }
}

#[test]
fn rmdp_is_reproducible_and_in_range() {
    let a = random_rmdp(5, 3, 123, 0.9, DivergenceKind::ChiSquared).unwrap();
    assert_eq!(a, random_rmdp(5, 3, 123, 0.9, DivergenceKind::ChiSquared).unwrap());
    assert_ne!(a, random_rmdp(5, 3, 124, 0.9, DivergenceKind::ChiSquared).unwrap());
    assert!((0.0..=1.0).contains(&a.kappa()));
    for s in 0..5 {
        for act in 0..3 {
            assert!((a.nominal(s, act).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(a.rewards(s, act).iter().all(|r| (0.0..1.0).contains(r)));
        }
    }
    assert_eq!(RNG_ALGORITHM, "chacha20-stream-v1");
}

#[test]
fn bellman_state_shapes() {
    let st = random_bellman_state(7, 4, 5).unwrap();
    assert_eq!(st.nominal.len(), 4);
    assert!(st.cost.iter().all(|b| b.len() == 7));
    assert!((0.0..=1.0).contains(&st.kappa));
    assert!(random_projection_instance(1, 0).is_err());
    assert!(random_rmdp(1, 1, 0, 0.9, DivergenceKind::Kl).is_err());
}

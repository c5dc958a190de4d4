use proptest::prelude::*;
use rmdp::format::{read_policy, read_query, write_policy, write_query};
use rmdp::instancegen::{random_projection_instance, random_rmdp};
use rmdp::{read_instance, write_instance, DivergenceKind, Error, Policy};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_round_trip(states in 2usize..6, actions in 1usize..4, seed in any::<u64>(), d in 0.01f64..0.999, k in 0usize..4) {
        let inst = random_rmdp(states, actions, seed, d, DivergenceKind::ALL[k]).unwrap();
        let bytes = write_instance(&inst);
        let back = read_instance(&bytes).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back), bytes);
    }

    #[test]
    fn query_round_trip(states in 2usize..50, seed in any::<u64>()) {
        let q = random_projection_instance(states, seed).unwrap();
        let back = read_query(&write_query(&q), q.accuracy).unwrap();
        prop_assert_eq!(back, q);
    }

    #[test]
    fn policy_round_trip(choice in prop::collection::vec(0usize..3, 1..8)) {
        let p = Policy::deterministic(3, &choice);
        prop_assert_eq!(read_policy(&write_policy(&p)).unwrap(), p);
    }
}

#[test]
fn validation_errors_are_reported() {
    let doc = br#"{"states": 2, "actions": 1, "discount": 1.5, "kappa": -1.0, "divergence": "kl",
        "rewards": [0.0, 0.0, 0.0, 0.0], "nominal": [0.5, 0.5, 0.9, 0.3]}"#;
    match read_instance(doc) {
        Err(Error::Validation(v)) => assert!(v.len() >= 3, "{v:?}"),
        other => panic!("expected validation failure, got {other:?}"),
    }
    assert!(matches!(read_instance(b"[1, 2"), Err(Error::Parse(_))));
}

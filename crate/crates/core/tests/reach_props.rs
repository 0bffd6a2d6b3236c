use proptest::prelude::*;

use pdres::arena::{expand_truncated, FrontierMode};
use pdres::engine::resilience_fixpoint;
use pdres::generators::{gen_fig3, gen_random, RandomParams};
use pdres::reach::{
    backward_induction_oracle, optimal_reach_value, split_edges_transform, without_disturbances, ReachError,
};
use pdres::{AnalysisOptions, PushdownGameSpec, Resilience};

fn reach_spec(seed: u64) -> PushdownGameSpec {
    let p = RandomParams {
        states: 1 + (seed % 4) as usize,
        symbols: 1 + (seed / 4 % 2) as usize,
        disturbance_prob: 0.0,
        unsafe_prob: 0.3,
        ..RandomParams::default()
    };
    gen_random(seed, &p)
}

#[test]
fn disturbances_are_rejected() {
    assert!(matches!(split_edges_transform(&gen_fig3()), Err(ReachError::HasDisturbances(2))));
    let clean = without_disturbances(&gen_fig3());
    let report = optimal_reach_value(&clean, &AnalysisOptions::with_height(6)).unwrap();
    assert_eq!(report.value().unwrap().value, Resilience::Finite(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn split_values_are_reach_times(seed in 0u64..100_000, t in 1usize..6) {
        let spec = reach_spec(seed);
        let split = split_edges_transform(&spec).unwrap();
        let a = expand_truncated(&spec, t, FrontierMode::Optimistic);
        let s = expand_truncated(&split, t, FrontierMode::Optimistic);
        let oracle = backward_induction_oracle(&a, a.unsafe_set());
        let table = resilience_fixpoint(&s);
        for v in a.vertices() {
            let Some(c) = a.config(v) else { continue };
            let w = s.vertex_of(&c).unwrap();
            let want = oracle[v.index()].map_or(Resilience::OmegaPlusOne, Resilience::Finite);
            prop_assert_eq!(table.value(w), want, "{:?}", c);
        }
    }

    #[test]
    fn split_shape(seed in 0u64..100_000) {
        let spec = reach_spec(seed);
        let split = split_edges_transform(&spec).unwrap();
        let (q, r) = (spec.state_count(), spec.rules().len());
        prop_assert_eq!(split.state_count(), q + r);
        prop_assert_eq!(split.disturbances().len(), r);
        prop_assert_eq!(split.rules().len(), r * (1 + spec.tops().len()));
        prop_assert_eq!(split.initial(), spec.initial());
        for (i, s) in spec.states().iter().enumerate() {
            let t = split.state(i);
            prop_assert_eq!(t.owner, s.owner.opponent());
            prop_assert_eq!(t.is_unsafe, s.is_unsafe);
            prop_assert_eq!(&t.name, &s.name);
        }
        for s in &split.states()[q..] {
            prop_assert_eq!(s.owner, pdres::Player::Zero);
            prop_assert!(!s.is_unsafe && s.name.ends_with("~s"));
        }
    }
}

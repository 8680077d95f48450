//! Randomized engine properties. The acceptance target runs the same
//! properties over 1000 seeds; here proptest samples a smaller set.

mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn barrier_isolation(seed in any::<u64>()) {
        prop_assert_eq!(common::barrier_isolation(seed), Ok(()));
    }

    #[test]
    fn schedules_agree(seed in any::<u64>()) {
        prop_assert_eq!(common::schedule_determinism(seed), Ok(()));
    }

    #[test]
    fn quiescence_is_idempotent(seed in any::<u64>()) {
        prop_assert_eq!(common::early_termination_idempotence(seed), Ok(()));
    }

    #[test]
    fn messages_follow_edges(seed in any::<u64>()) {
        prop_assert_eq!(common::message_locality(seed), Ok(()));
    }

    #[test]
    fn bellman_ford_round_bound(seed in any::<u64>()) {
        prop_assert_eq!(common::bellman_ford_bound(seed), Ok(()));
    }
}

#[test]
fn first_seeds_hold() {
    for (name, prop) in common::PROPERTIES {
        assert_eq!(common::check_property(prop, 25), Ok(()), "{name}");
    }
}

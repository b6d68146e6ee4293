mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::Rng;

use cbet::gridworld::{make_env, Action, EnvKind};
use cbet::novelty::{canonical_bytes, compute_change, hash_observation, ChangeKey, CountStore, RewardMix, StateKey};
use cbet::rng::{stream, Stream};
use common::DictCounts;

fn store(p: f64, seed: u64) -> CountStore {
    CountStore::new(0.99, p, stream(seed, Stream::CountReset, 0)).unwrap()
}

#[test]
fn rewards_match_dictionary_reference_bit_exactly() {
    for run in 0..10u64 {
        let mut rng = stream(run, Stream::Layout, 0);
        let mut s = store(0.01, run);
        let mut oracle = DictCounts::default();
        let mut resets = 0;
        for _ in 0..10_000 {
            // small key spaces so repeats are common
            let (sk, ck) = (rng.gen_range(0..200u64), rng.gen_range(0..50u64));
            let got = s.observe_and_reward(StateKey(sk), ChangeKey(ck));
            let want = oracle.observe(sk, ck);
            assert_eq!(got.to_bits(), want.to_bits());
            if s.maybe_reset() {
                oracle.clear();
                resets += 1;
            }
        }
        assert!(resets > 0);
        assert_eq!(s.resets(), resets);
    }
}

#[test]
fn fixed_pair_decays_as_one_over_two_k() {
    let mut s = store(0.0, 0);
    for k in 1..=100u32 {
        let r = s.observe_and_reward(StateKey(3), ChangeKey(4));
        assert_eq!(r, 1.0 / (2.0 * f64::from(k)));
    }
}

#[test]
fn reset_rate_is_close_to_p() {
    let mut s = store(0.01, 12345);
    let n = 100_000;
    let hits = (0..n).filter(|_| s.maybe_reset()).count();
    let rate = hits as f64 / n as f64;
    assert!((0.0091..=0.0109).contains(&rate), "rate {rate}");
}

#[test]
fn reset_clears_both_tables_together() {
    let mut s = store(0.01, 0);
    s.observe_and_reward(StateKey(1), ChangeKey(2));
    s.clear();
    assert_eq!((s.state_count(StateKey(1)), s.change_count(ChangeKey(2))), (0, 0));
    assert_eq!(s.observe_and_reward(StateKey(1), ChangeKey(2)), 0.5);
}

#[test]
fn distinct_observations_never_share_a_key() {
    let mut by_key: HashMap<u64, Vec<u8>> = HashMap::new();
    let mut rng = stream(7, Stream::Action, 0);
    for kind in [EnvKind::Doorkey, EnvKind::Unlock, EnvKind::Craftworld] {
        for layout in 0..300 {
            let mut env = make_env(kind, layout, true);
            let mut obs = env.reset(0);
            for _ in 0..200 {
                let bytes = canonical_bytes(&obs);
                let key = hash_observation(&obs).0;
                let prev = by_key.entry(key).or_insert_with(|| bytes.clone());
                assert_eq!(*prev, bytes, "hash collision on key {key:#x}");
                let step = env.step(Action::ALL[rng.gen_range(0..Action::COUNT)]).unwrap();
                if step.done {
                    break;
                }
                obs = step.observation;
            }
        }
    }
    assert!(by_key.len() > 20_000, "scan too small: {}", by_key.len());
}

#[test]
fn turning_in_place_changes_the_view() {
    let mut env = make_env(EnvKind::Doorkey, 2, true);
    let start = env.reset(0);
    let turned = env.step(Action::TurnLeft).unwrap().observation;
    let c = compute_change(&start, &turned).unwrap();
    assert_ne!(c, ChangeKey::empty());
    let stay = env.step(Action::Noop).unwrap().observation;
    assert_eq!(compute_change(&turned, &stay).unwrap(), ChangeKey::empty());
}

#[test]
fn mixing_example() {
    let m = RewardMix::new(0.005).unwrap();
    assert!((m.mix(1.0, 0.5) - 1.0025).abs() < 1e-15);
    assert!(RewardMix::new(-0.1).is_err());
}

#[test]
fn reset_probability_bound_is_enforced() {
    let rng = || stream(0, Stream::CountReset, 0);
    assert!(CountStore::new(0.99, 0.011, rng()).is_err());
    assert!(CountStore::new(0.99, 0.01, rng()).is_ok());
    assert!(CountStore::new(1.0, 0.0, rng()).is_err());
}

proptest! {
    #[test]
    fn store_agrees_with_reference_on_any_stream(
        keys in prop::collection::vec((0u64..32, 0u64..8), 1..400),
    ) {
        let mut s = store(0.0, 0);
        let mut oracle = DictCounts::default();
        for (sk, ck) in keys {
            let r = s.observe_and_reward(StateKey(sk), ChangeKey(ck));
            prop_assert_eq!(r, oracle.observe(sk, ck));
            prop_assert!(r > 0.0 && r <= 0.5);
            prop_assert_eq!(s.state_count(StateKey(sk)), oracle.states[&sk]);
            prop_assert_eq!(s.change_count(ChangeKey(ck)), oracle.changes[&ck]);
        }
    }

    #[test]
    fn reward_never_increases_for_a_repeated_pair(sk in any::<u64>(), ck in any::<u64>(), n in 2usize..60) {
        let mut s = store(0.0, 0);
        let rewards: Vec<f64> = (0..n).map(|_| s.observe_and_reward(StateKey(sk), ChangeKey(ck))).collect();
        prop_assert!(rewards.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn zero_alpha_mix_is_identity(re in -10.0f64..10.0, ri in 0.0f64..1.0) {
        prop_assert_eq!(RewardMix::new(0.0).unwrap().mix(re, ri), re);
    }

    #[test]
    fn snapshot_round_trip_continues_identically(p in 0.0f64..0.01, steps in 1usize..200) {
        let mut a = store(p, 9);
        for i in 0..steps as u64 {
            a.observe_and_reward(StateKey(i % 13), ChangeKey(i % 5));
            a.maybe_reset();
        }
        let mut b = CountStore::from_snapshot(a.snapshot()).unwrap();
        for i in 0..50u64 {
            prop_assert_eq!(a.maybe_reset(), b.maybe_reset());
            prop_assert_eq!(
                a.observe_and_reward(StateKey(i % 7), ChangeKey(i % 3)),
                b.observe_and_reward(StateKey(i % 7), ChangeKey(i % 3))
            );
        }
    }
}

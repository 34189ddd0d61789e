use ceerlab::ceers::{bounded_truncate_of, from_pairs, id, periodic_blocks, BlockPattern, Ceer};
use ceerlab::experiment::{random_pair_lister, random_pairs_below};
use ceerlab::kernel::{
    builtin_indices, decode_set, encode_set_u64, eval, pad, pair, pair_u64, smn, unpair, Budget, EvalOutcome, Nat,
    ProgramIndex,
};
use proptest::prelude::*;

fn value(o: EvalOutcome) -> Option<Nat> {
    match o {
        EvalOutcome::Converged { value, .. } => Some(value),
        EvalOutcome::OutOfFuel => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pairing_is_a_bijection(x in any::<u64>(), y in any::<u64>(), z in any::<u128>()) {
        let (a, b) = unpair(&pair_u64(x, y));
        prop_assert_eq!((a, b), (Nat::from(x), Nat::from(y)));
        let z = Nat::from(z);
        let (l, r) = unpair(&z);
        prop_assert_eq!(pair(&l, &r), z);
    }

    #[test]
    fn set_codes_round_trip(mut xs in prop::collection::vec(0u64..500, 0..20)) {
        xs.sort_unstable();
        xs.dedup();
        let back: Vec<Nat> = decode_set(&encode_set_u64(&xs));
        prop_assert_eq!(back, xs.iter().map(|&x| Nat::from(x)).collect::<Vec<_>>());
    }

    #[test]
    fn decoding_is_stable(code in any::<u64>()) {
        let p = ProgramIndex::new(code).decode();
        prop_assert_eq!(p.encode().decode(), p);
    }

    #[test]
    fn smn_and_padding_preserve_behavior(a in 0u64..1000, x in 0u64..1000, k in 0u64..4) {
        let e = builtin_indices().left_proj.clone();
        let direct = value(eval(&e, &pair_u64(a, x), 10_000));
        prop_assert_eq!(value(eval(&smn(&e, &Nat::from(a)), &Nat::from(x), 10_000)), direct.clone());
        let padded = pad(&e, k);
        prop_assert_eq!(value(eval(&padded, &pair_u64(a, x), 10_000)), direct);
    }

    #[test]
    fn identity_mod_k_matches_residues(k in 1u64..6, x in 0u64..30, y in 0u64..30) {
        let r = id(k).unwrap();
        let f = r.fragment(&Budget::new(200, 200, 30));
        prop_assert_eq!(f.same(&Nat::from(x), &Nat::from(y)), x % k == y % k);
    }

    #[test]
    fn fragments_grow_with_the_budget(seed in 0u64..1000, s in 5u64..60, extra in 0u64..60) {
        let r = from_pairs(random_pair_lister(seed, 8, 12));
        let small = r.fragment(&Budget::new(s, s, 12));
        let large = r.fragment(&Budget::new(s + extra, s + extra, 12));
        for x in 0..=12u64 {
            for y in 0..=12u64 {
                let (x, y) = (Nat::from(x), Nat::from(y));
                prop_assert!(!small.same(&x, &y) || large.same(&x, &y));
            }
        }
    }

    #[test]
    fn listed_pairs_are_eventually_equivalent(seed in 0u64..1000) {
        let r = from_pairs(random_pair_lister(seed, 6, 10));
        let f = r.fragment(&Budget::new(300, 300, 10));
        for (x, y) in random_pairs_below(seed, 6, 10) {
            prop_assert!(f.same(&Nat::from(x), &Nat::from(y)));
        }
    }

    #[test]
    fn truncation_respects_the_bound(seed in 0u64..1000, k in 1u64..4, s in 10u64..120) {
        let t = bounded_truncate_of(from_pairs(random_pair_lister(seed, 10, 8)), k).unwrap();
        prop_assert!(t.fragment(&Budget::new(s, s, 8)).max_class_size() as u64 <= k);
    }

    #[test]
    fn periodic_blocks_stay_bounded(seed in 0u64..1000, k in 2u64..5) {
        let r = periodic_blocks(BlockPattern::random(seed, k, 5, true));
        prop_assert!(r.fragment(&Budget::new(150, 150, 40)).max_class_size() as u64 <= k);
    }
}

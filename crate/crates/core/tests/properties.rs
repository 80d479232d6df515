use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

use lcm_sunflower::constructions::{esym, product_measure, WeightedGroundSet};
use lcm_sunflower::lcmfree::{find_lcm_k_tuple, find_lcm_k_tuple_naive, LcmInstance};
use lcm_sunflower::rational::{format_rational, parse_rational, sum_reciprocals};
use lcm_sunflower::setfam::{complement_family, find_k_cosunflower, find_k_sunflower, SetFamily};

fn family(max_ground: usize) -> impl Strategy<Value = SetFamily> {
    (1..=max_ground).prop_flat_map(|n| {
        btree_set(0u64..1 << n, 0..=(1usize << n).min(24)).prop_map(move |m| SetFamily::new(n, m).unwrap())
    })
}

fn weights(n: usize) -> impl Strategy<Value = Vec<BigRational>> {
    vec((1i64..50, 1i64..50), n).prop_map(|v| {
        v.into_iter().map(|(a, b)| BigRational::new(BigInt::from(a.min(b)), BigInt::from(a.max(b) + 1))).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn complement_is_an_involution(f in family(7)) {
        prop_assert_eq!(complement_family(&complement_family(&f)), f);
    }

    #[test]
    fn complement_swaps_sunflowers_and_cosunflowers(f in family(6), k in 3usize..=4) {
        let c = complement_family(&f);
        prop_assert_eq!(find_k_sunflower(&f, k).unwrap().is_some(), find_k_cosunflower(&c, k).unwrap().is_some());
    }

    #[test]
    fn json_round_trip(f in family(8)) {
        prop_assert_eq!(SetFamily::from_json_str(&f.to_json_string()).unwrap(), f);
    }

    #[test]
    fn reciprocal_sums_are_additive(a in vec(1u64..10_000, 0..30), b in vec(1u64..10_000, 0..30)) {
        let mut both = a.clone();
        both.extend(&b);
        prop_assert_eq!(sum_reciprocals(&both), sum_reciprocals(&a) + sum_reciprocals(&b));
    }

    #[test]
    fn rational_text_round_trip(p in -1_000_000i64..1_000_000, q in 1i64..1_000_000) {
        let r = BigRational::new(p.into(), q.into());
        prop_assert_eq!(parse_rational(&format_rational(&r)), Some(r));
    }

    #[test]
    fn measure_is_additive_and_normalized((w, f, g) in (1usize..=6).prop_flat_map(|n| (
        weights(n),
        btree_set(0u64..1 << n, 0..8),
        btree_set(0u64..1 << n, 0..8),
    ))) {
        let n = w.len();
        let ground = WeightedGroundSet::unlabelled(w).unwrap();
        let only_g: Vec<u64> = g.difference(&f).copied().collect();
        let mu = |m: &[u64]| product_measure(&SetFamily::new(n, m.iter().copied()).unwrap(), &ground).unwrap();
        let fv: Vec<u64> = f.iter().copied().collect();
        let union: Vec<u64> = f.union(&g).copied().collect();
        prop_assert_eq!(mu(&union), mu(&fv) + mu(&only_g));
        prop_assert_eq!(product_measure(&SetFamily::power_set(n).unwrap(), &ground).unwrap(), BigRational::one());
    }

    #[test]
    fn esym_is_symmetric_with_known_edges(mut w in weights(7), r in 0usize..=8, seed in any::<u64>()) {
        let before = esym(&w, r);
        let len = w.len();
        w.rotate_left((seed as usize) % len);
        w.swap(0, (seed as usize / 7) % len);
        prop_assert_eq!(esym(&w, r), before.clone());
        match r {
            0 => prop_assert_eq!(before, BigRational::one()),
            1 => prop_assert_eq!(before, w.iter().fold(BigRational::zero(), |a, x| a + x)),
            r if r > len => prop_assert_eq!(before, BigRational::zero()),
            _ => {}
        }
    }

    #[test]
    fn lcm_tuple_search_matches_naive(xs in btree_set(1u64..200, 0..14), k in 3usize..=4) {
        let inst = LcmInstance::new(xs).unwrap();
        prop_assert_eq!(find_lcm_k_tuple(&inst, k).unwrap(), find_lcm_k_tuple_naive(&inst, k).unwrap());
    }
}

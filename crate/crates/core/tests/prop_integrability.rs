use num_bigint::BigInt;
use proptest::prelude::*;

use quadtrap::integrability::{family_element, in_i_family, rat, Rational};

fn degree() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=7)
        .prop_filter("nonzero", |(n, _)| *n != 0)
        .prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    // every probed element is recognised and its witness reproduces it exactly
    #[test]
    fn family_elements_are_recognised(i in 1usize..=6, k in degree(), p in -1_000_000i64..=1_000_000) {
        let lambda = family_element(i, &k, &BigInt::from(p)).unwrap();
        let w = in_i_family(i, &k, &lambda).unwrap();
        prop_assert!(w.is_some());
        prop_assert_eq!(family_element(i, &k, &w.unwrap()).unwrap(), lambda);
    }

    #[test]
    fn witnesses_are_sound(i in 1usize..=6, k in degree(), n in -200i64..=200, d in 1i64..=16) {
        let lambda = rat(n, d);
        if let Some(p) = in_i_family(i, &k, &lambda).unwrap() {
            prop_assert_eq!(family_element(i, &k, &p).unwrap(), lambda);
        }
    }
}

mod support;

use proptest::prelude::*;

use support::*;

#[test]
fn until_matches_path_enumeration_exhaustively() {
    assert!(until_exhaustive() > 1_000_000);
}

#[test]
fn until_matches_path_enumeration_on_random_systems() {
    until_random(500, 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn negation_is_complement(f in formula(vec![]), lts in lts_strategy()) {
        complement_law(&f, &lts)?;
    }

    #[test]
    fn monotone_in_free_variable(
        f in formula(vec!["Z0".into()]),
        lts in lts_strategy(),
        x in any::<u32>(),
        extra in any::<u32>(),
    ) {
        monotone_law(&f, &lts, x, extra)?;
    }

    #[test]
    fn fixpoints_unfold(f in formula(vec!["Z0".into()]), lts in lts_strategy()) {
        unfolding_law(&f, &lts)?;
    }

    #[test]
    fn negation_duals(
        a in formula(vec![]),
        b in formula(vec![]),
        body in formula(vec!["Z0".into()]),
        lts in lts_strategy(),
    ) {
        duality_law(&a, &b, &body, &lts)?;
    }
}

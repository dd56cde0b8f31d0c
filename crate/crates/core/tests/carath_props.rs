mod common;

use common::rng;
use proptest::prelude::*;
use spectrex_core::lab::{random_defining_tuple, random_interior_point};
use spectrex_core::{carath_expand, CarathOptions, Verdict};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expansions_reassemble_into_free_extreme_terms(seed in 0u64..10_000, g in 2usize..4, d in 3usize..5, n0 in 1usize..3) {
        let mut r = rng(seed);
        let a = random_defining_tuple(g, d, &mut r).unwrap();
        let x = random_interior_point(&a, n0, &mut r).unwrap();
        let exp = carath_expand(&a, &x, &CarathOptions::default(), &mut r).unwrap();
        prop_assume!(exp.trace.verdict == Verdict::Arveson);
        prop_assert!(exp.residual_reassembly <= 1e-9);
        prop_assert!(exp.residual_point <= 1e-8);
        prop_assert!(exp.residual_isometry <= 1e-8);
        prop_assert!(!exp.terms.is_empty());
        for t in &exp.terms {
            prop_assert!(t.irreducible && t.arveson);
        }
        if d > g {
            let gn0 = g * n0;
            let bound = gn0.div_ceil(d - g) as f64 / gn0 as f64;
            prop_assert!(exp.trace.mu <= bound + 1e-12, "mu {} bound {bound}", exp.trace.mu);
        }
    }
}

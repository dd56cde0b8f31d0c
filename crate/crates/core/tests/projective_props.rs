mod common;

use common::{random_orthogonal, rng, spin_disk, tuple};
use nalgebra::DMatrix;
use proptest::prelude::*;
use spectrex_core::lab::{boundedness_check, random_defining_tuple, random_interior_point, random_tuple};
use spectrex_core::projective::{spin_disk_det, transform};
use spectrex_core::sym::HomTuple;
use spectrex_core::{
    bounded_pair, classify, dilate_to_extreme, image_pencil, projective_map_point, spin_disk_map, to_boundary,
    DilationOptions, Flag, ProjectiveMap, ToleranceConfig,
};

fn map_strategy() -> impl Strategy<Value = ProjectiveMap> {
    proptest::collection::vec(-2.0..2.0f64, 9).prop_map(|v| ProjectiveMap::new(DMatrix::from_vec(3, 3, v)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_map_respects_direct_sums(w in map_strategy(), x in tuple(3, 2), z in tuple(3, 1)) {
        let whole = transform(&w, &HomTuple::from_full(x.direct_sum(&z).unwrap())).unwrap();
        let parts = transform(&w, &HomTuple::from_full(x.clone())).unwrap().as_full()
            .direct_sum(&transform(&w, &HomTuple::from_full(z)).unwrap().as_full()).unwrap();
        prop_assert_eq!(whole.as_full(), parts);
    }

    #[test]
    fn linear_map_commutes_with_conjugation(w in map_strategy(), x in tuple(3, 3), seed in 0u64..1000) {
        let u = random_orthogonal(3, seed);
        let h = HomTuple::from_full(x.clone());
        let before = transform(&w, &HomTuple::from_full(x.conjugate(&u).unwrap())).unwrap().as_full();
        let after = transform(&w, &h).unwrap().as_full().conjugate(&u).unwrap();
        prop_assert!(before.sub(&after).unwrap().norm() < 1e-12);
        // Permutations move entries only, so agreement is exact.
        let p = DMatrix::from_fn(3, 3, |r, c| if (r + 1) % 3 == c { 1.0 } else { 0.0 });
        let before = transform(&w, &HomTuple::from_full(x.conjugate(&p).unwrap())).unwrap().as_full();
        prop_assert_eq!(before, transform(&w, &h).unwrap().as_full().conjugate(&p).unwrap());
    }

    #[test]
    fn spin_disk_form(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let a = random_defining_tuple(2, 2, &mut r).unwrap();
        let map = spin_disk_map(&a).unwrap();
        let image = image_pencil(&map, &a).unwrap();
        prop_assert!((image.inhomogeneous() - DMatrix::identity(2, 2)).norm() < 1e-10);
        prop_assert!(image.rest().sub(&spin_disk()).unwrap().norm() < 1e-10);
        let closed = spin_disk_det(&a).unwrap();
        prop_assert!((closed - map.det).abs() <= 1e-12 * (1.0 + closed.abs()));
    }

    #[test]
    fn pair_boundedness_agrees_with_feasibility_test(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let a = random_tuple(2, 2, &mut r).unwrap();
        prop_assert_eq!(bounded_pair(&a).unwrap(), boundedness_check(&a).unwrap());
    }
}

#[test]
fn matrix_flag_survives_the_spin_disk_map() {
    let cfg = ToleranceConfig::default();
    let b = spin_disk();
    let mut r = rng(77);
    let mut checked = 0;
    while checked < 40 {
        let a = random_defining_tuple(2, 2, &mut r).unwrap();
        let map = spin_disk_map(&a).unwrap();
        let x = random_interior_point(&a, 2, &mut r).unwrap();
        let mut points = vec![to_boundary(&a, &x).unwrap()];
        let opts = DilationOptions { to_boundary: true, ..DilationOptions::default() };
        points.push(dilate_to_extreme(&a, &x, &opts, &mut r).unwrap().final_point);
        for p in points {
            let before = classify(&a, &p, &cfg).unwrap().matrix;
            let after = classify(&b, &projective_map_point(&map, &p).unwrap(), &cfg).unwrap().matrix;
            if before != Flag::Indeterminate && after != Flag::Indeterminate {
                assert_eq!(before, after);
                checked += 1;
            }
        }
    }
}

mod common;

use common::{noisy_fixture, rng};
use proptest::prelude::*;
use spectrex_core::kernel::kernel_dim;
use spectrex_core::lab::{random_defining_tuple, random_interior_point};
use spectrex_core::{
    dilate_to_extreme, eval_pencil, psd_within_slack, purify_full, DilationOptions, PurifyMode, PurifyObjective,
    Target, ToleranceConfig, Verdict,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn traces_grow_the_kernel_and_stay_in_the_cone(seed in 0u64..10_000, g in 2usize..4, n0 in 1usize..3) {
        let mut r = rng(seed);
        let a = random_defining_tuple(g, 3, &mut r).unwrap();
        let x = random_interior_point(&a, n0, &mut r).unwrap();
        let opts = DilationOptions { to_boundary: true, ..DilationOptions::default() };
        let trace = dilate_to_extreme(&a, &x, &opts, &mut r).unwrap();
        let mut last = trace.reports[0].k;
        for step in &trace.steps {
            prop_assert!(step.kernel_dim > last);
            last = step.kernel_dim;
        }
        prop_assert_eq!(trace.final_level(), n0 + trace.steps.len());
        if trace.verdict != Verdict::Failed {
            prop_assert!(trace.steps.len() <= g * n0);
            let l = eval_pencil(&a, &trace.final_point).unwrap();
            prop_assert!(psd_within_slack(l.matrix(), opts.tol.psd_slack));
        }
    }

    #[test]
    fn frozen_purification_keeps_the_start_block(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let a = random_defining_tuple(3, 4, &mut r).unwrap();
        let x = random_interior_point(&a, 2, &mut r).unwrap();
        let opts = DilationOptions { target: Target::ArvesonOnly, purify: PurifyMode::Frozen, ..DilationOptions::default() };
        let trace = dilate_to_extreme(&a, &x, &opts, &mut r).unwrap();
        for (y, x) in trace.final_point.mats().iter().zip(x.mats()) {
            prop_assert_eq!(y.view((0, 0), (2, 2)).into_owned(), x.clone());
        }
    }
}

#[test]
fn purification_recovers_noisy_kernels() {
    let cfg = ToleranceConfig::default();
    let mut recovered = 0;
    let total = 40;
    for seed in 0..total {
        let (a, clean, noisy) = noisy_fixture(2 + seed as usize % 2, 3, seed, 1e-8);
        let clean_k = kernel_dim(&a, &clean, cfg.lmi_post).unwrap();
        let p = purify_full(&a, &noisy, &cfg, PurifyObjective::Diagonal).unwrap();
        let moved = p.point.sub(&noisy).unwrap().mats().iter().flat_map(|m| m.iter().copied()).fold(0.0, |m: f64, v| m.max(v.abs()));
        assert!(moved <= cfg.purify_eps, "moved {moved:e}");
        if kernel_dim(&a, &p.point, cfg.lmi_post).unwrap() == clean_k {
            recovered += 1;
        }
    }
    assert!(recovered * 10 >= total * 9, "recovered {recovered}/{total}");
}

mod common;

use common::{sorted_eigenvalues, symmetric, tuple};
use nalgebra::DMatrix;
use proptest::prelude::*;
use spectrex_core::sym::kron;
use spectrex_core::{canonical_shuffle, eval_linear, eval_pencil, SymTuple};

/// `I + Σ Aᵢ⊗Xᵢ` assembled entry by entry.
fn naive_pencil(a: &SymTuple, x: &SymTuple) -> DMatrix<f64> {
    let (d, n) = (a.n(), x.n());
    DMatrix::from_fn(d * n, d * n, |r, c| {
        let (ar, xr, ac, xc) = (r / n, r % n, c / n, c % n);
        let lin: f64 = a.mats().iter().zip(x.mats()).map(|(ai, xi)| ai[(ar, ac)] * xi[(xr, xc)]).sum();
        lin + if r == c { 1.0 } else { 0.0 }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pencil_matches_kronecker_oracle(a in tuple(2, 3), x in tuple(2, 2)) {
        let l = eval_pencil(&a, &x).unwrap();
        prop_assert!((l.matrix() - naive_pencil(&a, &x)).norm() < 1e-12);
        let via_kron = a.mats().iter().zip(x.mats()).fold(DMatrix::identity(6, 6), |acc, (ai, xi)| acc + kron(ai, xi));
        prop_assert!((l.matrix() - via_kron).norm() < 1e-12);
    }

    #[test]
    fn matrix_convexity_identity(a in tuple(2, 2), x in tuple(2, 3), v in proptest::collection::vec(-1.0..1.0f64, 6)) {
        let v = DMatrix::from_vec(3, 2, v);
        let d = a.n();
        let iv = kron(&DMatrix::identity(d, d), &v);
        let lhs = iv.transpose() * eval_pencil(&a, &x).unwrap().matrix() * &iv;
        let rhs = kron(&DMatrix::identity(d, d), &(v.transpose() * &v))
            + eval_linear(&a, &x.conjugate(&v).unwrap()).unwrap().matrix();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn direct_sum_spectrum(a in tuple(2, 2), x in tuple(2, 2), z in tuple(2, 1)) {
        let joint = sorted_eigenvalues(eval_pencil(&a, &x.direct_sum(&z).unwrap()).unwrap().matrix());
        let mut parts = sorted_eigenvalues(eval_pencil(&a, &x).unwrap().matrix());
        parts.extend(sorted_eigenvalues(eval_pencil(&a, &z).unwrap().matrix()));
        parts.sort_by(f64::total_cmp);
        for (p, q) in joint.iter().zip(&parts) {
            prop_assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn shuffle_preserves_spectrum_exactly(m in symmetric(6), split in 1usize..3) {
        let p = canonical_shuffle(2, split, 3 - split);
        let shuffled = p.conjugate(&m);
        let mut a: Vec<f64> = m.iter().copied().collect();
        let mut b: Vec<f64> = shuffled.iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        // A permutation similarity only moves entries.
        prop_assert_eq!(a, b);
        prop_assert_eq!(p.inverse().conjugate(&shuffled), m);
    }
}

//! Generators shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectrex_core::SymTuple;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn symmetric(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-2.0..2.0f64, n * n).prop_map(move |v| {
        let m = DMatrix::from_vec(n, n, v);
        (&m + m.transpose()) * 0.5
    })
}

pub fn tuple(g: usize, n: usize) -> impl Strategy<Value = SymTuple> {
    proptest::collection::vec(symmetric(n), g).prop_map(|m| SymTuple::new(m).unwrap())
}

pub fn spin_disk() -> SymTuple {
    SymTuple::from_rows(&[
        vec![vec![1.0, 0.0], vec![0.0, -1.0]],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    ])
    .unwrap()
}

pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    spectrex_core::linalg::sym_eigen(m).0
}

pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut r)).qr().q()
}

/// Kernel containment `ker L_A(X) ⊆ ker(I⊗B₀ + Σ Aᵢ⊗Bᵢ)` over symmetric
/// `B`, assembled with Kronecker products. `X` is matrix extreme iff the
/// only solutions are multiples of `(I, X)`, i.e. the nullity is one.
/// Returns the nullity and the relative gap around the rank cut.
pub fn containment_nullity(a: &SymTuple, x: &SymTuple, kernel: &DMatrix<f64>) -> (usize, f64) {
    use spectrex_core::sym::kron;
    let (d, n) = (a.n(), x.n());
    let mut coeffs = vec![DMatrix::identity(d, d)];
    coeffs.extend(a.mats().iter().cloned());
    let mut cols = Vec::new();
    for c in &coeffs {
        for p in 0..n {
            for q in p..n {
                let mut e = DMatrix::zeros(n, n);
                e[(p, q)] = 1.0;
                e[(q, p)] = 1.0;
                let image = kron(c, &e) * kernel;
                cols.push(nalgebra::DVector::from_column_slice(image.as_slice()));
            }
        }
    }
    let m = DMatrix::from_columns(&cols);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.resize(m.ncols(), 0.0);
    let top = sv[0];
    let rank = sv.iter().filter(|&&s| s > 1e-8 * top).count();
    let lo = sv.get(rank).copied().unwrap_or(0.0);
    let hi = if rank > 0 { sv[rank - 1] } else { top };
    (m.ncols() - rank, lo / hi)
}

/// Boundary points reached by dilating random interior points, together
/// with their start points pushed to the boundary; levels at most `max_n`.
pub fn boundary_points(g: usize, d: usize, n0: usize, count: usize, max_n: usize, seed: u64) -> Vec<(SymTuple, SymTuple)> {
    use spectrex_core::lab::{random_defining_tuple, random_interior_point};
    use spectrex_core::{dilate_to_extreme, to_boundary, DilationOptions};
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let a = random_defining_tuple(g, d, &mut r).unwrap();
        let x = random_interior_point(&a, n0, &mut r).unwrap();
        let start = to_boundary(&a, &x).unwrap();
        out.push((a.clone(), start));
        let opts = DilationOptions {
            to_boundary: true,
            max_steps: Some(max_n - n0),
            ..DilationOptions::default()
        };
        if let Ok(trace) = dilate_to_extreme(&a, &x, &opts, &mut r) {
            if trace.final_level() <= max_n {
                out.push((a, trace.final_point));
            }
        }
    }
    out.truncate(count);
    out
}

/// Bounded random LP `min cᵀx s.t. Gx ≤ h, |xᵢ| ≤ 3`, feasible at the origin.
pub fn random_lp(vars: usize, rows: usize, seed: u64) -> spectrex_core::opt::LinearProgram {
    use rand::Rng;
    let mut r = rng(seed);
    let c: Vec<f64> = (0..vars).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut lp = spectrex_core::opt::LinearProgram::new(c);
    for _ in 0..rows {
        let row: Vec<f64> = (0..vars).map(|_| r.random_range(-1.0..1.0)).collect();
        lp.le(&row, r.random_range(0.5..1.5));
    }
    for i in 0..vars {
        for s in [1.0, -1.0] {
            let mut row = vec![0.0; vars];
            row[i] = s;
            lp.le(&row, 3.0);
        }
    }
    lp
}

/// Minimum of `cᵀx` over all feasible vertices of `Gx ≤ h`.
pub fn vertex_enumeration(lp: &spectrex_core::opt::LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let m = lp.g.nrows();
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let sub = DMatrix::from_fn(n, n, |i, j| lp.g[(pick[i], j)]);
        let rhs = nalgebra::DVector::from_fn(n, |i, _| lp.h[pick[i]]);
        if let Some(x) = sub.clone().lu().solve(&rhs) {
            let conditioned = sub.singular_values().min() > 1e-9;
            let feasible = (0..m).all(|r| (lp.g.row(r) * &x)[0] <= lp.h[r] + 1e-9);
            if conditioned && feasible {
                let value: f64 = lp.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(value, |b| b.min(value)));
            }
        }
        // Next n-subset of 0..m in lexicographic order.
        let Some(i) = (0..n).rev().find(|&i| pick[i] < m - n + i) else {
            return best;
        };
        pick[i] += 1;
        for j in i + 1..n {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

/// Clean boundary point with a large kernel and a copy carrying symmetric
/// entrywise noise of size `noise`.
pub fn noisy_fixture(g: usize, d: usize, seed: u64, noise: f64) -> (SymTuple, SymTuple, SymTuple) {
    use rand::Rng;
    use spectrex_core::lab::{random_defining_tuple, random_interior_point};
    use spectrex_core::{dilate_to_extreme, DilationOptions};
    let mut r = rng(seed);
    loop {
        let a = random_defining_tuple(g, d, &mut r).unwrap();
        let x = random_interior_point(&a, 1, &mut r).unwrap();
        let opts = DilationOptions { to_boundary: true, ..DilationOptions::default() };
        let Ok(trace) = dilate_to_extreme(&a, &x, &opts, &mut r) else { continue };
        if trace.verdict == spectrex_core::Verdict::Failed {
            continue;
        }
        let clean = trace.final_point;
        let n = clean.n();
        let noisy = SymTuple::new(
            clean
                .mats()
                .iter()
                .map(|m| {
                    let e = DMatrix::from_fn(n, n, |_, _| r.random_range(-noise..noise));
                    m + (&e + e.transpose()) * 0.5
                })
                .collect(),
        )
        .unwrap();
        return (a, clean, noisy);
    }
}

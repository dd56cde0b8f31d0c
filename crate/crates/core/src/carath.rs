//! Free Caratheodory expansions: dilate to an Arveson extreme point, split
//! it into irreducible summands and compress back to the start level.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dilation::{dilate_to_extreme, DilationOptions, DilationTrace, PurifyMode, Target, Verdict};
use crate::error::{Error, Result};
use crate::extreme::{classify, is_irreducible, symmetric_commutant, Flag};
use crate::linalg::sym_eigen;
use crate::sym::SymTuple;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarathOptions {
    pub dilation: DilationOptions,
    /// Relative eigenvalue gap separating commutant eigenspaces.
    pub split_gap: f64,
    /// Terms whose compression has Frobenius norm at most this are dropped.
    pub drop_below: f64,
}

impl Default for CarathOptions {
    fn default() -> Self {
        Self {
            dilation: DilationOptions {
                target: Target::ArvesonOnly,
                purify: PurifyMode::Frozen,
                ..DilationOptions::default()
            },
            split_gap: 1e-8,
            drop_below: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarathTerm {
    pub point: SymTuple,
    /// `nᵢ × n₀` compression.
    pub v: Vec<Vec<f64>>,
    pub irreducible: bool,
    pub arveson: bool,
}

impl CarathTerm {
    pub fn v_matrix(&self) -> DMatrix<f64> {
        let rows = self.v.len();
        let cols = self.v.first().map_or(0, Vec::len);
        DMatrix::from_fn(rows, cols, |r, c| self.v[r][c])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarathExpansion {
    pub terms: Vec<CarathTerm>,
    /// `‖Σ VᵢᵀXⁱVᵢ − X⁰‖_F`.
    pub residual_point: f64,
    /// `‖Σ VᵢᵀVᵢ − I‖_F`.
    pub residual_isometry: f64,
    /// `‖U(⊕Xⁱ)Uᵀ − Y‖_F` over all summands, dropped ones included.
    pub residual_reassembly: f64,
    pub trace: DilationTrace,
}

impl CarathExpansion {
    pub fn succeeded(&self) -> bool {
        self.trace.verdict == Verdict::Arveson && !self.terms.is_empty()
    }

    /// Every term is an irreducible Arveson extreme point.
    pub fn all_free(&self) -> bool {
        self.terms.iter().all(|t| t.irreducible && t.arveson)
    }
}

/// Splits `y` into irreducible summands; returns orthonormal bases of the
/// invariant subspaces.
pub fn irreducible_blocks<R: Rng + ?Sized>(
    y: &SymTuple,
    cfg: &crate::kernel::ToleranceConfig,
    split_gap: f64,
    rng: &mut R,
) -> Result<Vec<DMatrix<f64>>> {
    let n = y.n();
    let mut done = Vec::new();
    let mut pending = vec![DMatrix::<f64>::identity(n, n)];
    let mut splits = 0;
    while let Some(u) = pending.pop() {
        let z = y.conjugate(&u)?;
        let m = z.n();
        let commutant = symmetric_commutant(&z, cfg.irreducible)?;
        if commutant.len() <= 1 {
            done.push(u);
            continue;
        }
        let mut s = DMatrix::zeros(m, m);
        for c in &commutant {
            let w: f64 = StandardNormal.sample(rng);
            s += c * w;
        }
        let reference = s.norm();
        let shift = s.trace() / m as f64;
        for i in 0..m {
            s[(i, i)] -= shift;
        }
        let groups = eigen_clusters(&s, split_gap * reference);
        if groups.len() <= 1 {
            done.push(u);
            continue;
        }
        splits += 1;
        if splits > n {
            return Err(Error::Decomposition(n));
        }
        for g in groups {
            pending.push(&u * g);
        }
    }
    done.reverse();
    Ok(done)
}

/// Orthonormal eigenvector blocks of `s`, one per eigenvalue cluster;
/// eigenvalues closer than `gap` share a cluster.
fn eigen_clusters(s: &DMatrix<f64>, gap: f64) -> Vec<DMatrix<f64>> {
    let m = s.nrows();
    let (values, vectors) = sym_eigen(s);
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=m {
        if i == m || values[i] - values[i - 1] > gap {
            groups.push(vectors.columns(start, i - start).into_owned());
            start = i;
        }
    }
    groups
}

/// Free Caratheodory expansion of `X⁰`.
pub fn carath_expand<R: Rng + ?Sized>(
    a: &SymTuple,
    x0: &SymTuple,
    opts: &CarathOptions,
    rng: &mut R,
) -> Result<CarathExpansion> {
    let n0 = x0.n();
    let trace = dilate_to_extreme(a, x0, &opts.dilation, rng)?;
    if trace.verdict != Verdict::Arveson {
        return Ok(CarathExpansion {
            terms: Vec::new(),
            residual_point: f64::NAN,
            residual_isometry: f64::NAN,
            residual_reassembly: f64::NAN,
            trace,
        });
    }
    let y = &trace.final_point;
    let cfg = &opts.dilation.tol;
    let blocks = irreducible_blocks(y, cfg, opts.split_gap, rng)?;
    let n = y.n();
    let mut reassembled: Vec<DMatrix<f64>> = vec![DMatrix::zeros(n, n); a.g()];
    let mut terms = Vec::new();
    let mut sum_point: Vec<DMatrix<f64>> = vec![DMatrix::zeros(n0, n0); a.g()];
    let mut sum_iso = DMatrix::<f64>::zeros(n0, n0);
    for u in blocks {
        let xi = y.conjugate(&u)?;
        for (acc, m) in reassembled.iter_mut().zip(xi.mats()) {
            *acc += &u * m * u.transpose();
        }
        let v = u.rows(0, n0).transpose();
        if v.norm() <= opts.drop_below {
            continue;
        }
        for (acc, m) in sum_point.iter_mut().zip(xi.mats()) {
            *acc += v.transpose() * m * &v;
        }
        sum_iso += v.transpose() * &v;
        let report = classify(a, &xi, cfg)?;
        terms.push(CarathTerm {
            irreducible: is_irreducible(&xi, cfg.irreducible)?,
            arveson: report.arveson == Flag::Yes,
            v: (0..v.nrows()).map(|r| v.row(r).iter().copied().collect()).collect(),
            point: xi,
        });
    }
    let residual_point = sum_point
        .iter()
        .zip(x0.mats())
        .map(|(s, x)| (s - x).norm_squared())
        .sum::<f64>()
        .sqrt();
    let residual_isometry = (sum_iso - DMatrix::identity(n0, n0)).norm();
    let residual_reassembly = reassembled
        .iter()
        .zip(y.mats())
        .map(|(r, m)| (r - m).norm_squared())
        .sum::<f64>()
        .sqrt();
    Ok(CarathExpansion {
        terms,
        residual_point,
        residual_isometry,
        residual_reassembly,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuStats {
    pub n0: usize,
    pub g: usize,
    pub d: usize,
    pub mu: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; zero for a single success.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub fails: usize,
    pub matrix_not_arveson: usize,
    /// `⌈g·n₀/d⌉/(g·n₀)`.
    pub mu_est: f64,
}

/// μ statistics over Arveson-terminated traces; failures and matrix
/// extreme terminations are counted but excluded.
pub fn mu_statistics(d: usize, traces: &[DilationTrace]) -> Result<MuStats> {
    let first = traces.first().ok_or(Error::Empty("no traces"))?;
    let n0 = first.start_level;
    let g = first.final_point.g();
    if traces.iter().any(|t| t.start_level != n0 || t.final_point.g() != g) {
        return Err(Error::Invalid("traces mix start levels or tuple sizes".into()));
    }
    let mu: Vec<f64> = traces
        .iter()
        .filter(|t| t.verdict == Verdict::Arveson)
        .map(|t| t.mu)
        .collect();
    if mu.is_empty() {
        return Err(Error::Empty("no successful traces"));
    }
    let count = mu.len() as f64;
    let mean = mu.iter().sum::<f64>() / count;
    let std = if mu.len() > 1 {
        (mu.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(MuStats {
        n0,
        g,
        d,
        min: mu.iter().copied().fold(f64::INFINITY, f64::min),
        max: mu.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        std,
        fails: traces.iter().filter(|t| t.verdict == Verdict::Failed).count(),
        matrix_not_arveson: traces.iter().filter(|t| t.verdict == Verdict::MatrixNotArveson).count(),
        mu_est: mu_estimate(g, d, n0),
        mu,
    })
}

/// `⌈g·n₀/d⌉/(g·n₀)`.
pub fn mu_estimate(g: usize, d: usize, n0: usize) -> f64 {
    (g * n0).div_ceil(d) as f64 / (g * n0) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spin_disk() -> SymTuple {
        SymTuple::from_rows(&[
            vec![vec![1.0, 0.0], vec![0.0, -1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        ])
        .unwrap()
    }

    #[test]
    fn estimate_values() {
        assert_eq!(mu_estimate(2, 2, 3), 0.5);
        assert!((mu_estimate(3, 3, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mu_estimate(2, 3, 2), 0.5);
    }

    #[test]
    fn free_extreme_start_is_one_term() {
        let a = spin_disk();
        let x0 = SymTuple::from_scalars(&[0.6, 0.8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = carath_expand(&a, &x0, &CarathOptions::default(), &mut rng).unwrap();
        assert!(e.succeeded());
        assert_eq!(e.terms.len(), 1);
        assert!(e.trace.steps.is_empty());
        assert!(e.residual_point < 1e-15 && e.residual_isometry < 1e-15);
    }

    #[test]
    fn origin_of_spin_disk_expands_on_circle() {
        let a = spin_disk();
        let x0 = SymTuple::zeros(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = carath_expand(&a, &x0, &CarathOptions::default(), &mut rng).unwrap();
        assert!(e.succeeded(), "{:?}", e.trace.failure);
        assert!(e.residual_point < 1e-8 && e.residual_isometry < 1e-8);
        assert!(e.residual_reassembly < 1e-9);
        for t in &e.terms {
            assert_eq!(t.point.n(), 1);
            let r = t.point.mat(0)[(0, 0)].hypot(t.point.mat(1)[(0, 0)]);
            assert!((r - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn direct_sum_splits() {
        let a = SymTuple::from_scalars(&[0.3, -0.2]).unwrap();
        let b = SymTuple::from_scalars(&[0.5, 0.1]).unwrap();
        let y = a.direct_sum(&b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let blocks = irreducible_blocks(&y, &Default::default(), 1e-8, &mut rng).unwrap();
        assert_eq!(blocks.len(), 2);
    }
}

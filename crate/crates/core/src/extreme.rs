//! Extreme point equations, rank-nullity counts and classification.
//!
//! Symmetric unknowns use the row-major upper triangle: entry `(i, j)`
//! with `i ≤ j` of a level-n coordinate sits at `i·n − i(i−1)/2 + (j−i)`.
//! Off-diagonal unknowns appear once and multiply both mirrored entries.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{lmi_kernel, NumericalKernel, ToleranceConfig, ZeroTol};
use crate::linalg::{min_eigenvalue, numerical_nullspace, NullSpace};
use crate::sym::{eval_linear_rect, eval_pencil, ColumnTuple, SymTuple};

pub const SVEC_LAYOUT: &str =
    "coordinate-major; within a coordinate the row-major upper triangle, (i,j) -> i*n - i(i-1)/2 + (j-i)";
pub const COLUMN_LAYOUT: &str = "coordinate-major; (i, x) -> i*n + x";

pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry `(i, j)` (either order) in the upper-triangle layout.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i + 1) / 2 + (j - i)
}

/// Inverse of [`svec_index`].
pub fn svec_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(svec_len(n));
    for i in 0..n {
        for j in i..n {
            out.push((i, j));
        }
    }
    out
}

/// Symmetric matrix from its upper-triangle vector.
pub fn svec_to_mat(n: usize, v: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for (idx, (i, j)) in svec_pairs(n).into_iter().enumerate() {
        m[(i, j)] = v[idx];
        m[(j, i)] = v[idx];
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    Arveson,
    Euclidean,
    MatrixExtreme,
}

/// A materialized linear system in the unknowns of a dilation direction.
#[derive(Debug, Clone)]
pub struct EquationMatrix {
    pub kind: EquationKind,
    pub data: DMatrix<f64>,
    pub unknown_layout: &'static str,
}

impl EquationMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }
}

fn check_kernel(a: &SymTuple, x: &SymTuple, kernel: &DMatrix<f64>) -> Result<()> {
    if a.g() != x.g() {
        return Err(Error::Dimension("pencil and point differ in g".into()));
    }
    if kernel.nrows() != a.n() * x.n() {
        return Err(Error::Dimension(format!(
            "kernel has {} rows, expected {}",
            kernel.nrows(),
            a.n() * x.n()
        )));
    }
    Ok(())
}

/// `β ↦ Λ_A(βᵀ)K` over the gn entries of a column tuple.
pub fn arveson_system(a: &SymTuple, x: &SymTuple, kernel: &DMatrix<f64>) -> Result<EquationMatrix> {
    check_kernel(a, x, kernel)?;
    let (g, d, n, k) = (a.g(), a.n(), x.n(), kernel.ncols());
    let mut data = DMatrix::zeros(d * k, g * n);
    for col in 0..k {
        for i in 0..g {
            let ai = a.mat(i);
            for r in 0..d {
                for b in 0..d {
                    let coef = ai[(r, b)];
                    if coef == 0.0 {
                        continue;
                    }
                    for xx in 0..n {
                        data[(col * d + r, i * n + xx)] += coef * kernel[(b * n + xx, col)];
                    }
                }
            }
        }
    }
    Ok(EquationMatrix {
        kind: EquationKind::Arveson,
        data,
        unknown_layout: COLUMN_LAYOUT,
    })
}

/// Accumulates the rows of `(Σ_c C_c ⊗ β_c) K` for symmetric unknowns
/// `β_c`, with coordinate `c` starting at column `offset + c·s`.
fn symmetric_block_rows(
    coeffs: &[&DMatrix<f64>],
    n: usize,
    kernel: &DMatrix<f64>,
    data: &mut DMatrix<f64>,
) {
    let d = coeffs[0].nrows();
    let s = svec_len(n);
    let dn = d * n;
    for col in 0..kernel.ncols() {
        for (c, ac) in coeffs.iter().enumerate() {
            for r in 0..d {
                for b in 0..d {
                    let coef = ac[(r, b)];
                    if coef == 0.0 {
                        continue;
                    }
                    for xx in 0..n {
                        for y in 0..n {
                            let unknown = c * s + svec_index(n, xx, y);
                            data[(col * dn + r * n + xx, unknown)] += coef * kernel[(b * n + y, col)];
                        }
                    }
                }
            }
        }
    }
}

/// `β ↦ Λ_A(β)K` over symmetric tuples β.
pub fn euclidean_system(a: &SymTuple, x: &SymTuple, kernel: &DMatrix<f64>) -> Result<EquationMatrix> {
    check_kernel(a, x, kernel)?;
    let (g, d, n, k) = (a.g(), a.n(), x.n(), kernel.ncols());
    let mut data = DMatrix::zeros(d * n * k, g * svec_len(n));
    let coeffs: Vec<&DMatrix<f64>> = a.mats().iter().collect();
    symmetric_block_rows(&coeffs, n, kernel, &mut data);
    Ok(EquationMatrix {
        kind: EquationKind::Euclidean,
        data,
        unknown_layout: SVEC_LAYOUT,
    })
}

/// `(β₀, β) ↦ (I⊗β₀ + Σ Aᵢ⊗βᵢ)K` plus the trace row
/// `tr(β₀ + Σ Xᵢβᵢ) = 0` that removes the direction `(I, X)`.
pub fn matrix_extreme_system(
    a: &SymTuple,
    x: &SymTuple,
    kernel: &DMatrix<f64>,
) -> Result<EquationMatrix> {
    check_kernel(a, x, kernel)?;
    let (g, d, n, k) = (a.g(), a.n(), x.n(), kernel.ncols());
    let s = svec_len(n);
    let mut data = DMatrix::zeros(d * n * k + 1, (g + 1) * s);
    let identity = DMatrix::identity(d, d);
    let mut coeffs: Vec<&DMatrix<f64>> = vec![&identity];
    coeffs.extend(a.mats().iter());
    symmetric_block_rows(&coeffs, n, kernel, &mut data);
    let last = d * n * k;
    for (p, q) in svec_pairs(n) {
        let idx = svec_index(n, p, q);
        if p == q {
            data[(last, idx)] = 1.0;
        }
        for i in 0..g {
            let xi = x.mat(i);
            data[(last, (i + 1) * s + idx)] = if p == q {
                xi[(p, p)]
            } else {
                xi[(p, q)] + xi[(q, p)]
            };
        }
    }
    Ok(EquationMatrix {
        kind: EquationKind::MatrixExtreme,
        data,
        unknown_layout: "beta_0 first, then beta_1..beta_g; each coordinate in the row-major upper triangle",
    })
}

/// Minimum kernel dimensions forced by counting equations against unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankNullityCounts {
    pub arveson: usize,
    pub euclidean: usize,
    pub matrix: usize,
}

/// `(⌈gn/d⌉, ⌈g(n+1)/(2d)⌉, ⌈(n(n+1)(g+1) − 2)/(2dn)⌉)`.
pub fn rank_nullity_counts(g: usize, d: usize, n: usize) -> RankNullityCounts {
    assert!(g > 0 && d > 0 && n > 0, "counts need positive sizes");
    RankNullityCounts {
        arveson: (g * n).div_ceil(d),
        euclidean: (g * (n + 1)).div_ceil(2 * d),
        matrix: (n * (n + 1) * (g + 1) - 2).div_ceil(2 * d * n),
    }
}

/// Solution space of the Arveson equations.
#[derive(Debug, Clone)]
pub struct DilationSubspace {
    pub basis: Vec<ColumnTuple>,
    pub dim: usize,
}

impl DilationSubspace {
    fn full(g: usize, n: usize) -> Self {
        let basis: Vec<ColumnTuple> = (0..g * n)
            .map(|j| {
                let mut v = vec![0.0; g * n];
                v[j] = 1.0;
                ColumnTuple::from_flat(g, n, &v)
            })
            .collect();
        Self {
            dim: basis.len(),
            basis,
        }
    }
}

pub(crate) fn subspace_from_kernel(
    a: &SymTuple,
    x: &SymTuple,
    kernel: Option<&NumericalKernel>,
    ee: ZeroTol,
) -> Result<(DilationSubspace, Option<NullSpace>)> {
    let (g, n) = (a.g(), x.n());
    let Some(kernel) = kernel else {
        return Ok((DilationSubspace::full(g, n), None));
    };
    let sys = arveson_system(a, x, &kernel.basis)?;
    let ns = numerical_nullspace(&sys.data, ee)?;
    let basis = (0..ns.nullity)
        .map(|c| ColumnTuple::from_flat(g, n, ns.basis.column(c).as_slice()))
        .collect::<Vec<_>>();
    Ok((
        DilationSubspace {
            dim: basis.len(),
            basis,
        },
        Some(ns),
    ))
}

/// Orthonormal basis of all β with `Λ_A(βᵀ)K = 0`; the whole space for
/// interior points.
pub fn dilation_subspace(a: &SymTuple, x: &SymTuple, cfg: &ToleranceConfig) -> Result<DilationSubspace> {
    let kernel = lmi_kernel(a, x, cfg.lmi_post)?;
    Ok(subspace_from_kernel(a, x, kernel.as_ref(), cfg.ee)?.0)
}

/// Residual `‖Λ_A(βᵀ)K‖_F`.
pub fn arveson_residual(a: &SymTuple, beta: &ColumnTuple, kernel: &DMatrix<f64>) -> Result<f64> {
    let rows: Vec<DMatrix<f64>> = beta.as_matrices().iter().map(|b| b.transpose()).collect();
    let lam = eval_linear_rect(a, &rows)?;
    Ok((lam * kernel).norm())
}

/// The linear map `S ↦ (XᵢS − SXᵢ)ᵢ` on symmetric `S`.
fn commutator_system(x: &SymTuple) -> DMatrix<f64> {
    let n = x.n();
    let pairs = svec_pairs(n);
    let mut data = DMatrix::zeros(x.g() * n * n, pairs.len());
    for (col, &(p, q)) in pairs.iter().enumerate() {
        let mut e = DMatrix::zeros(n, n);
        e[(p, q)] = 1.0;
        e[(q, p)] = 1.0;
        for (i, xi) in x.mats().iter().enumerate() {
            let c = xi * &e - &e * xi;
            for r in 0..n {
                for s in 0..n {
                    data[(i * n * n + r * n + s, col)] = c[(r, s)];
                }
            }
        }
    }
    data
}

/// Basis of the symmetric matrices commuting with every coordinate.
pub fn symmetric_commutant(x: &SymTuple, tol: ZeroTol) -> Result<Vec<DMatrix<f64>>> {
    let n = x.n();
    let ns = numerical_nullspace(&commutator_system(x), tol)?;
    Ok((0..ns.nullity)
        .map(|c| svec_to_mat(n, ns.basis.column(c).as_slice()))
        .collect())
}

/// True iff the symmetric commutant is one dimensional (the scalars).
pub fn is_irreducible(x: &SymTuple, tol: ZeroTol) -> Result<bool> {
    if x.n() == 1 {
        return Ok(true);
    }
    Ok(symmetric_commutant(x, tol)?.len() == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Yes,
    No,
    Indeterminate,
}

impl Flag {
    pub fn is_yes(self) -> bool {
        self == Flag::Yes
    }

    fn and(self, other: Flag) -> Flag {
        match (self, other) {
            (Flag::No, _) | (_, Flag::No) => Flag::No,
            (Flag::Yes, Flag::Yes) => Flag::Yes,
            _ => Flag::Indeterminate,
        }
    }
}

impl From<bool> for Flag {
    fn from(b: bool) -> Self {
        if b {
            Flag::Yes
        } else {
            Flag::No
        }
    }
}

/// Size and conditioning of one equation system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemEvidence {
    pub rows: usize,
    pub cols: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub nullity: usize,
}

impl SystemEvidence {
    fn from_nullspace(rows: usize, cols: usize, ns: &NullSpace) -> Self {
        Self {
            rows,
            cols,
            sigma_min: ns.sigma_min(),
            sigma_max: ns.sigma_max(),
            nullity: ns.nullity,
        }
    }

    /// Trivial nullspace means extreme; a smallest singular value in
    /// `[mag, 10·mag)` is too close to call.
    fn verdict(&self, ee: ZeroTol) -> Flag {
        if self.nullity > 0 {
            Flag::No
        } else if self.sigma_min < 10.0 * ee.mag {
            Flag::Indeterminate
        } else {
            Flag::Yes
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub arveson: Option<SystemEvidence>,
    pub euclidean: Option<SystemEvidence>,
    pub matrix: Option<SystemEvidence>,
}

/// Classification of a point of a free spectrahedron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeReport {
    pub g: usize,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub dil_dim: usize,
    pub counts: RankNullityCounts,
    pub euclidean: Flag,
    pub matrix: Flag,
    pub arveson: Flag,
    pub irreducible: Flag,
    pub free: Flag,
    pub evidence: Evidence,
    pub min_eigenvalue: f64,
    pub kernel_accuracy: Option<f64>,
}

impl ExtremeReport {
    pub fn is_matrix_not_arveson(&self) -> bool {
        self.matrix == Flag::Yes && self.arveson == Flag::No
    }
}

/// Classifies `X ∈ D_A`; points outside by more than `psd_slack` are
/// rejected.
pub fn classify(a: &SymTuple, x: &SymTuple, cfg: &ToleranceConfig) -> Result<ExtremeReport> {
    let l = eval_pencil(a, x)?;
    let lam = min_eigenvalue(l.matrix());
    if lam < -cfg.psd_slack {
        return Err(Error::Outside(lam));
    }
    let kernel = crate::kernel::symmetric_kernel(l.matrix(), cfg.lmi_post)?;
    classify_with_kernel(a, x, kernel.as_ref(), lam, cfg)
}

pub(crate) fn classify_with_kernel(
    a: &SymTuple,
    x: &SymTuple,
    kernel: Option<&NumericalKernel>,
    min_eigenvalue: f64,
    cfg: &ToleranceConfig,
) -> Result<ExtremeReport> {
    let (g, d, n) = (a.g(), a.n(), x.n());
    let counts = rank_nullity_counts(g, d, n);
    let irreducible = Flag::from(is_irreducible(x, cfg.irreducible)?);
    let Some(kernel) = kernel else {
        return Ok(ExtremeReport {
            g,
            d,
            n,
            k: 0,
            dil_dim: g * n,
            counts,
            euclidean: Flag::No,
            matrix: Flag::No,
            arveson: Flag::No,
            irreducible,
            free: Flag::No,
            evidence: Evidence::default(),
            min_eigenvalue,
            kernel_accuracy: None,
        });
    };
    let k = kernel.k;
    let (subspace, arv_ns) = subspace_from_kernel(a, x, Some(kernel), cfg.ee)?;
    let arv_ns = arv_ns.expect("kernel present");
    let arv_ev = SystemEvidence::from_nullspace(d * k, g * n, &arv_ns);

    let euc = euclidean_system(a, x, &kernel.basis)?;
    let euc_ns = numerical_nullspace(&euc.data, cfg.ee)?;
    let euc_ev = SystemEvidence::from_nullspace(euc.rows(), euc.cols(), &euc_ns);

    let mat = matrix_extreme_system(a, x, &kernel.basis)?;
    let mat_ns = numerical_nullspace(&mat.data, cfg.ee)?;
    let mat_ev = SystemEvidence::from_nullspace(mat.rows(), mat.cols(), &mat_ns);

    let euclidean = euc_ev.verdict(cfg.ee);
    let mut matrix = mat_ev.verdict(cfg.ee);
    let mut arveson = arv_ev.verdict(cfg.ee);
    // A symmetric Euclidean direction yields matrix and Arveson directions,
    // and Arveson extreme points are matrix extreme.
    if euclidean == Flag::No {
        matrix = Flag::No;
        arveson = Flag::No;
    }
    if arveson == Flag::Yes {
        matrix = Flag::Yes;
    }
    let free = arveson.and(irreducible);

    let report = ExtremeReport {
        g,
        d,
        n,
        k,
        dil_dim: subspace.dim,
        counts,
        euclidean,
        matrix,
        arveson,
        irreducible,
        free,
        evidence: Evidence {
            arveson: Some(arv_ev),
            euclidean: Some(euc_ev),
            matrix: Some(mat_ev),
        },
        min_eigenvalue,
        kernel_accuracy: Some(kernel.accuracy),
    };
    debug_assert!(k >= counts.arveson || report.arveson == Flag::No);
    debug_assert!(k >= counts.matrix || report.matrix == Flag::No);
    debug_assert!(k >= counts.euclidean || report.euclidean == Flag::No);
    Ok(report)
}

/// Nonzero vectors in the nullspace of an equation matrix, as flat vectors.
pub fn equation_nullspace(sys: &EquationMatrix, tol: ZeroTol) -> Result<Vec<DVector<f64>>> {
    let ns = numerical_nullspace(&sys.data, tol)?;
    Ok((0..ns.nullity).map(|c| ns.basis.column(c).into_owned()).collect())
}

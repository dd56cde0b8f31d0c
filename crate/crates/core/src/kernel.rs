//! Zero-calling on spectra and numerical kernels of pencil evaluations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::sym::{eval_pencil, SymTuple};

/// Magnitude and gap thresholds for calling a value zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTol {
    pub mag: f64,
    pub gap: f64,
}

impl ZeroTol {
    pub const fn new(mag: f64, gap: f64) -> Self {
        Self { mag, gap }
    }
}

/// Every tolerance the pipeline consults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// Kernel decisions before purification.
    pub lmi_pre: ZeroTol,
    /// Kernel decisions for classification (after purification).
    pub lmi_post: ZeroTol,
    /// Extreme-equation nullspaces.
    pub ee: ZeroTol,
    /// Symmetric commutant nullspace.
    pub irreducible: ZeroTol,
    pub purify_eps: f64,
    pub psd_slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            lmi_pre: ZeroTol::new(1e-7, 1e-2),
            lmi_post: ZeroTol::new(1e-11, 1e-11),
            ee: ZeroTol::new(1e-15, 1e-15),
            irreducible: ZeroTol::new(1e-10, 1e-4),
            purify_eps: 1e-7,
            psd_slack: 1e-11,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("lmi_pre.mag", self.lmi_pre.mag),
            ("lmi_pre.gap", self.lmi_pre.gap),
            ("lmi_post.mag", self.lmi_post.mag),
            ("lmi_post.gap", self.lmi_post.gap),
            ("ee.mag", self.ee.mag),
            ("ee.gap", self.ee.gap),
            ("irreducible.mag", self.irreducible.mag),
            ("irreducible.gap", self.irreducible.gap),
            ("purify_eps", self.purify_eps),
            ("psd_slack", self.psd_slack),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// First numerical zero: the smallest 1-based index `i ≥ 2` with
/// `σᵢ < mag` and `σᵢ/σᵢ₋₁ < gap`. Values are taken in magnitude and are
/// expected in descending order.
pub fn delta(values: &[f64], tol: ZeroTol) -> Result<Option<usize>> {
    if values.is_empty() {
        return Err(Error::Empty("zero-calling needs at least one value"));
    }
    for i in 1..values.len() {
        let cur = values[i].abs();
        let prev = values[i - 1].abs();
        if cur < tol.mag && cur / prev < tol.gap {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

/// Number of values called zero. When even the largest value is below
/// `mag` every value is zero; otherwise this is `len − Δ + 1`.
pub(crate) fn nullity_from_values(values: &[f64], tol: ZeroTol) -> Result<usize> {
    if values.is_empty() {
        return Ok(0);
    }
    if values[0].abs() < tol.mag {
        return Ok(values.len());
    }
    Ok(match delta(values, tol)? {
        Some(i) => values.len() - i + 1,
        None => 0,
    })
}

/// Orthonormal basis of the numerical kernel of `L_A(X)`.
#[derive(Debug, Clone)]
pub struct NumericalKernel {
    /// `dn × k`, orthonormal columns.
    pub basis: DMatrix<f64>,
    pub k: usize,
    /// 1-based index of the first numerical zero in the sorted spectrum.
    pub first_zero_index: usize,
    /// Magnitude of the first numerical zero, raised to the largest
    /// column residual when roundoff dominates.
    pub accuracy: f64,
    /// Eigenvalues of `L_A(X)` sorted by magnitude, descending.
    pub spectrum: Vec<f64>,
}

/// Kernel of a symmetric matrix under zero-calling; `None` when no
/// eigenvalue is called zero.
pub fn symmetric_kernel(m: &DMatrix<f64>, tol: ZeroTol) -> Result<Option<NumericalKernel>> {
    let size = m.nrows();
    if size == 0 {
        return Err(Error::Empty("kernel of an empty matrix"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let (values, vectors) = sym_eigen(m);
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&i, &j| values[j].abs().total_cmp(&values[i].abs()));
    let spectrum: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let k = nullity_from_values(&spectrum, tol)?;
    if k == 0 {
        return Ok(None);
    }
    let first_zero_index = size - k + 1;
    let cols: Vec<usize> = order[size - k..].to_vec();
    let basis = DMatrix::from_fn(size, k, |r, c| vectors[(r, cols[c])]);
    // Below roundoff the computed eigenvalue understates the residual.
    let worst_column = (m * &basis).column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(Some(NumericalKernel {
        basis,
        k,
        first_zero_index,
        accuracy: spectrum[first_zero_index - 1].abs().max(worst_column),
        spectrum,
    }))
}

/// Numerical kernel of `L_A(X)`; `None` for points called interior.
pub fn lmi_kernel(a: &SymTuple, x: &SymTuple, tol: ZeroTol) -> Result<Option<NumericalKernel>> {
    let l = eval_pencil(a, x)?;
    symmetric_kernel(l.matrix(), tol)
}

/// Kernel dimension of `L_A(X)`, zero for interior points.
pub fn kernel_dim(a: &SymTuple, x: &SymTuple, tol: ZeroTol) -> Result<usize> {
    Ok(lmi_kernel(a, x, tol)?.map_or(0, |k| k.k))
}

/// True iff the smallest eigenvalue is at least `−slack`.
pub fn psd_within_slack(m: &DMatrix<f64>, slack: f64) -> bool {
    crate::linalg::min_eigenvalue(m) >= -slack
}

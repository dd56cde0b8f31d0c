//! Dense helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kernel::{nullity_from_values, ZeroTol};

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Singular values sorted descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical nullspace of a (possibly wide) matrix.
#[derive(Debug, Clone)]
pub struct NullSpace {
    /// Orthonormal columns spanning the nullspace.
    pub basis: DMatrix<f64>,
    /// One value per unknown, descending; unknowns beyond the row count
    /// contribute exact zeros.
    pub singular_values: Vec<f64>,
    pub nullity: usize,
}

impl NullSpace {
    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// Nullspace of `m` with dimension decided by zero-calling on its
/// singular values.
pub fn numerical_nullspace(m: &DMatrix<f64>, tol: ZeroTol) -> Result<NullSpace> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 {
        return Ok(NullSpace {
            basis: DMatrix::zeros(0, 0),
            singular_values: Vec::new(),
            nullity: 0,
        });
    }
    if rows == 0 {
        return Ok(NullSpace {
            basis: DMatrix::identity(cols, cols),
            singular_values: vec![0.0; cols],
            nullity: cols,
        });
    }
    let square = if rows < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Internal("SVD did not return right vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    if rows < cols {
        for v in values.iter_mut().skip(rows) {
            *v = 0.0;
        }
    }
    let nullity = nullity_from_values(&values, tol)?;
    let basis = DMatrix::from_fn(cols, nullity, |r, c| v_t[(order[cols - nullity + c], r)]);
    Ok(NullSpace {
        basis,
        singular_values: values,
        nullity,
    })
}

/// Pseudo-inverse square root of a symmetric PSD matrix; eigenvalues
/// below `rel · λ_max` count as zero.
pub fn pinv_sqrt(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let top = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (i, &lam) in values.iter().enumerate() {
        if lam > rel * top && lam > 0.0 {
            let v = vectors.column(i);
            out += (v * v.transpose()) / lam.sqrt();
        }
    }
    out
}

/// Square root of a symmetric PSD matrix.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let d = DVector::from_iterator(values.len(), values.iter().map(|v| v.max(0.0).sqrt()));
    &vectors * DMatrix::from_diagonal(&d) * vectors.transpose()
}

/// Orthonormal basis of the column span (Gram-Schmidt twice).
pub fn orthonormalize(m: &DMatrix<f64>, drop_below: f64) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dot(&v);
                v -= q * proj;
            }
        }
        let nv = v.norm();
        if nv > drop_below {
            cols.push(v / nv);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    DMatrix::from_columns(&cols)
}

/// Minimum-norm least squares solution of `m x = b`.
pub fn min_norm_solve(m: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    let top = svd.singular_values.iter().fold(0.0_f64, |a, &v| a.max(v));
    svd.solve(b, rcond * top.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_nullspace_pads_exact_zeros() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let ns = numerical_nullspace(&m, ZeroTol::new(1e-15, 1e-15)).unwrap();
        assert_eq!(ns.nullity, 2);
        assert_eq!(ns.singular_values[1], 0.0);
        assert_eq!(ns.singular_values[2], 0.0);
        assert!((&m * &ns.basis).norm() < 1e-14);
        let gram = ns.basis.transpose() * &ns.basis;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn full_rank_square_has_trivial_nullspace() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let ns = numerical_nullspace(&m, ZeroTol::new(1e-15, 1e-15)).unwrap();
        assert_eq!(ns.nullity, 0);
    }

    #[test]
    fn rank_one_square() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let ns = numerical_nullspace(&m, ZeroTol::new(1e-12, 1e-6)).unwrap();
        assert_eq!(ns.nullity, 1);
        let v = ns.basis.column(0);
        assert!((v[0] * 2.0 + v[1] * 4.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_sqrt_of_scaled_identity() {
        let m = DMatrix::identity(2, 2) * 4.0;
        let p = pinv_sqrt(&m, 1e-12);
        assert!((p - DMatrix::identity(2, 2) * 0.5).norm() < 1e-15);
    }

    #[test]
    fn pinv_sqrt_of_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p = pinv_sqrt(&m, 1e-12);
        assert!((p - m).norm() < 1e-15);
    }

    #[test]
    fn eigen_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -1.0]);
        let (v, _) = sym_eigen(&m);
        assert_eq!(v, vec![-1.0, 3.0]);
    }
}

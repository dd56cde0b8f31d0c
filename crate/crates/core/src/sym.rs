//! Tuples of symmetric matrices and evaluation of linear pencils.
//!
//! Kronecker products follow `A ⊗ X`: the entry `(a, x), (b, y)` of
//! `L_A(X)` lives at row `a·n + x`, column `b·n + y`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest asymmetry that is silently repaired by averaging.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A g-tuple of real symmetric n×n matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TupleRows", try_from = "TupleRows")]
pub struct SymTuple {
    n: usize,
    mats: Vec<DMatrix<f64>>,
}

/// Plain nested-row form used for serialization.
#[derive(Serialize, Deserialize)]
struct TupleRows {
    n: usize,
    mats: Vec<Vec<Vec<f64>>>,
}

impl From<SymTuple> for TupleRows {
    fn from(t: SymTuple) -> Self {
        Self {
            n: t.n,
            mats: t.to_rows(),
        }
    }
}

impl TryFrom<TupleRows> for SymTuple {
    type Error = Error;

    fn try_from(rows: TupleRows) -> Result<Self> {
        if rows.mats.is_empty() {
            return Ok(Self::zeros(0, rows.n));
        }
        let t = Self::from_rows(&rows.mats)?;
        if t.n != rows.n {
            return Err(Error::Dimension(format!("declared n = {} but matrices are {}×{}", rows.n, t.n, t.n)));
        }
        Ok(t)
    }
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            m[(i, i)]
        } else {
            (m[(i, j)] + m[(j, i)]) / 2.0
        }
    })
}

impl SymTuple {
    /// Validates shape and symmetry. Matrices asymmetric by at most
    /// [`SYMMETRY_TOL`] are averaged with their transpose.
    pub fn new(mats: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::Empty("tuple needs at least one matrix"));
        };
        let n = first.nrows();
        if n == 0 {
            return Err(Error::Dimension("matrices must be at least 1x1".into()));
        }
        for (index, m) in mats.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!(
                    "matrix {index} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            for row in 0..n {
                for col in row + 1..n {
                    let diff = (m[(row, col)] - m[(col, row)]).abs();
                    if diff > SYMMETRY_TOL || !diff.is_finite() {
                        return Err(Error::Asymmetric {
                            index,
                            row,
                            col,
                            diff,
                        });
                    }
                }
            }
        }
        Ok(Self::assemble(mats))
    }

    /// Builds from nested rows `mats[i][row][col]`.
    pub fn from_rows(rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut mats = Vec::with_capacity(rows.len());
        for (index, m) in rows.iter().enumerate() {
            let n = m.len();
            if let Some(bad) = m.iter().position(|r| r.len() != n) {
                return Err(Error::Ragged(format!(
                    "matrix {index} row {bad} has {} entries, expected {n}",
                    m[bad].len()
                )));
            }
            mats.push(DMatrix::from_fn(n, n, |i, j| m[i][j]));
        }
        Self::new(mats)
    }

    /// Internal constructor for results that are symmetric up to rounding.
    pub(crate) fn assemble(mats: Vec<DMatrix<f64>>) -> Self {
        let n = mats[0].nrows();
        let mats = mats.iter().map(symmetrized).collect();
        Self { n, mats }
    }

    pub fn zeros(g: usize, n: usize) -> Self {
        Self {
            n,
            mats: vec![DMatrix::zeros(n, n); g],
        }
    }

    /// Scalars `(x₁, …, x_g)` as a level-1 tuple.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| DMatrix::from_element(1, 1, x)).collect())
    }

    pub fn g(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn mat(&self, i: usize) -> &DMatrix<f64> {
        &self.mats[i]
    }

    pub fn into_mats(self) -> Vec<DMatrix<f64>> {
        self.mats
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.g() != other.g() || self.n != other.n {
            return Err(Error::Dimension(format!(
                "tuples ({}, {}) and ({}, {}) differ",
                self.g(),
                self.n,
                other.g(),
                other.n
            )));
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            mats: self.mats.iter().map(|m| m * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            n: self.n,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            n: self.n,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a - b).collect(),
        })
    }

    /// `X ⊕ Z` coordinatewise.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.g() != other.g() {
            return Err(Error::Dimension(format!(
                "direct sum of {}-tuple with {}-tuple",
                self.g(),
                other.g()
            )));
        }
        let n = self.n + other.n;
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut m = DMatrix::zeros(n, n);
                m.view_mut((0, 0), (self.n, self.n)).copy_from(a);
                m.view_mut((self.n, self.n), (other.n, other.n)).copy_from(b);
                m
            })
            .collect();
        Ok(Self { n, mats })
    }

    /// `(VᵀX₁V, …, VᵀX_gV)` for an n×m matrix `V`.
    pub fn conjugate(&self, v: &DMatrix<f64>) -> Result<Self> {
        if v.nrows() != self.n {
            return Err(Error::Dimension(format!(
                "conjugating level {} tuple by {}x{} matrix",
                self.n,
                v.nrows(),
                v.ncols()
            )));
        }
        if v.ncols() == 0 {
            return Err(Error::Dimension("conjugation to level 0".into()));
        }
        let vt = v.transpose();
        Ok(Self::assemble(
            self.mats.iter().map(|m| &vt * m * v).collect(),
        ))
    }

    /// Principal block on coordinates `start..start+len`.
    pub fn compress(&self, start: usize, len: usize) -> Self {
        Self {
            n: len,
            mats: self
                .mats
                .iter()
                .map(|m| m.view((start, start), (len, len)).into_owned())
                .collect(),
        }
    }

    /// The one-column extension `[[X, β], [βᵀ, γ]]`.
    pub fn extend(&self, beta: &ColumnTuple, gamma: &[f64]) -> Result<Self> {
        if beta.g() != self.g() || beta.n() != self.n || gamma.len() != self.g() {
            return Err(Error::Dimension(
                "extension column does not match the tuple".into(),
            ));
        }
        let n = self.n + 1;
        let mats = self
            .mats
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let mut m = DMatrix::zeros(n, n);
                m.view_mut((0, 0), (self.n, self.n)).copy_from(x);
                for r in 0..self.n {
                    m[(r, self.n)] = beta.vec(i)[r];
                    m[(self.n, r)] = beta.vec(i)[r];
                }
                m[(self.n, self.n)] = gamma[i];
                m
            })
            .collect();
        Ok(Self { n, mats })
    }

    /// Frobenius norm of the stacked tuple.
    pub fn norm(&self) -> f64 {
        self.mats.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry over all coordinates.
    pub fn max_abs(&self) -> f64 {
        self.mats
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(|m| m.iter().all(|&v| v == 0.0))
    }

    pub fn to_rows(&self) -> Vec<Vec<Vec<f64>>> {
        self.mats
            .iter()
            .map(|m| {
                (0..self.n)
                    .map(|i| (0..self.n).map(|j| m[(i, j)]).collect())
                    .collect()
            })
            .collect()
    }
}

/// A g-tuple of column vectors in ℝⁿ, the shape of a one-column dilation.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnTuple {
    cols: Vec<DVector<f64>>,
}

impl ColumnTuple {
    pub fn new(cols: Vec<DVector<f64>>) -> Result<Self> {
        let Some(first) = cols.first() else {
            return Err(Error::Empty("column tuple needs at least one vector"));
        };
        let n = first.len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::Ragged("column tuple vectors differ in length".into()));
        }
        Ok(Self { cols })
    }

    /// Unflattens `v[i·n + x]`.
    pub fn from_flat(g: usize, n: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), g * n, "flat column tuple has wrong length");
        Self {
            cols: (0..g)
                .map(|i| DVector::from_column_slice(&v[i * n..(i + 1) * n]))
                .collect(),
        }
    }

    pub fn g(&self) -> usize {
        self.cols.len()
    }

    pub fn n(&self) -> usize {
        self.cols[0].len()
    }

    pub fn vec(&self, i: usize) -> &DVector<f64> {
        &self.cols[i]
    }

    pub fn flat(&self) -> Vec<f64> {
        self.cols.iter().flat_map(|c| c.iter().copied()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.cols.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            cols: self.cols.iter().map(|c| c * s).collect(),
        }
    }

    /// The coefficient matrices as n×1 matrices.
    pub fn as_matrices(&self) -> Vec<DMatrix<f64>> {
        self.cols
            .iter()
            .map(|c| DMatrix::from_column_slice(c.len(), 1, c.as_slice()))
            .collect()
    }
}

/// A tuple `(X₀, X)` whose first coordinate is the inhomogeneous one.
#[derive(Debug, Clone, PartialEq)]
pub struct HomTuple {
    inhomogeneous: DMatrix<f64>,
    rest: SymTuple,
}

impl HomTuple {
    pub fn new(inhomogeneous: DMatrix<f64>, rest: SymTuple) -> Result<Self> {
        let mut all = vec![inhomogeneous];
        all.extend(rest.mats.iter().cloned());
        let full = SymTuple::new(all)?;
        Ok(Self::from_full(full))
    }

    /// Splits a (g+1)-tuple into `(X₀, X)`.
    pub fn from_full(full: SymTuple) -> Self {
        let mut mats = full.mats;
        let inhomogeneous = mats.remove(0);
        let rest = if mats.is_empty() {
            SymTuple {
                n: full.n,
                mats: Vec::new(),
            }
        } else {
            SymTuple { n: full.n, mats }
        };
        Self {
            inhomogeneous,
            rest,
        }
    }

    pub fn inhomogeneous(&self) -> &DMatrix<f64> {
        &self.inhomogeneous
    }

    pub fn rest(&self) -> &SymTuple {
        &self.rest
    }

    pub fn n(&self) -> usize {
        self.inhomogeneous.nrows()
    }

    /// Number of homogeneous coordinates g (the tuple has g+1 entries).
    pub fn g(&self) -> usize {
        self.rest.mats.len()
    }

    /// All g+1 matrices, inhomogeneous first.
    pub fn coordinates(&self) -> Vec<&DMatrix<f64>> {
        std::iter::once(&self.inhomogeneous)
            .chain(self.rest.mats.iter())
            .collect()
    }

    pub fn as_full(&self) -> SymTuple {
        let mut mats = vec![self.inhomogeneous.clone()];
        mats.extend(self.rest.mats.iter().cloned());
        SymTuple { n: self.n(), mats }
    }
}

/// A symmetric `dn × dn` pencil value together with its block sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilEvaluation {
    matrix: DMatrix<f64>,
    d: usize,
    n: usize,
}

impl PencilEvaluation {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::min_eigenvalue(&self.matrix)
    }
}

/// Accumulates `scale · (a ⊗ x)` into `out` for rectangular blocks.
pub(crate) fn kron_add(out: &mut DMatrix<f64>, a: &DMatrix<f64>, x: &DMatrix<f64>, scale: f64) {
    let (p, q) = (x.nrows(), x.ncols());
    for r in 0..a.nrows() {
        for s in 0..a.ncols() {
            let coef = scale * a[(r, s)];
            if coef == 0.0 {
                continue;
            }
            for i in 0..p {
                for j in 0..q {
                    out[(r * p + i, s * q + j)] += coef * x[(i, j)];
                }
            }
        }
    }
}

/// `a ⊗ x` for arbitrary shapes.
pub fn kron(a: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() * x.nrows(), a.ncols() * x.ncols());
    kron_add(&mut out, a, x, 1.0);
    out
}

fn check_pencil(a: &SymTuple, g: usize) -> Result<()> {
    if a.g() != g {
        return Err(Error::Dimension(format!(
            "pencil has {} coefficients, point has {g} coordinates",
            a.g()
        )));
    }
    Ok(())
}

/// `Σ Aᵢ ⊗ Mᵢ` for rectangular coordinates `Mᵢ` (all the same shape).
pub fn eval_linear_rect(a: &SymTuple, m: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    check_pencil(a, m.len())?;
    let (p, q) = (m[0].nrows(), m[0].ncols());
    if m.iter().any(|x| x.nrows() != p || x.ncols() != q) {
        return Err(Error::Dimension("coordinates differ in shape".into()));
    }
    let d = a.n();
    let mut out = DMatrix::zeros(d * p, d * q);
    for (ai, xi) in a.mats().iter().zip(m) {
        kron_add(&mut out, ai, xi, 1.0);
    }
    Ok(out)
}

/// The homogeneous part `Λ_A(X) = Σ Aᵢ ⊗ Xᵢ`.
pub fn eval_linear(a: &SymTuple, x: &SymTuple) -> Result<PencilEvaluation> {
    let matrix = eval_linear_rect(a, x.mats())?;
    Ok(PencilEvaluation {
        matrix,
        d: a.n(),
        n: x.n(),
    })
}

/// The monic pencil `L_A(X) = I + Σ Aᵢ ⊗ Xᵢ`.
pub fn eval_pencil(a: &SymTuple, x: &SymTuple) -> Result<PencilEvaluation> {
    let mut ev = eval_linear(a, x)?;
    for i in 0..ev.matrix.nrows() {
        ev.matrix[(i, i)] += 1.0;
    }
    Ok(ev)
}

/// `Λ_A(β)` for a column tuple: a `dn × d` matrix.
pub fn lambda_column(a: &SymTuple, beta: &ColumnTuple) -> Result<DMatrix<f64>> {
    eval_linear_rect(a, &beta.as_matrices())
}

/// Evaluates a pencil with an explicit inhomogeneous coefficient:
/// `Λ_{(A₀,A)}(X₀, X) = A₀⊗X₀ + Σ Aᵢ⊗Xᵢ`.
pub fn eval_homogeneous(a: &HomTuple, x: &HomTuple) -> Result<PencilEvaluation> {
    check_pencil(a.rest(), x.g())?;
    let d = a.n();
    let n = x.n();
    let mut out = DMatrix::zeros(d * n, d * n);
    for (ai, xi) in a.coordinates().into_iter().zip(x.coordinates()) {
        kron_add(&mut out, ai, xi, 1.0);
    }
    Ok(PencilEvaluation { matrix: out, d, n })
}

/// A permutation stored as `map[new] = old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self {
            map: (0..len).collect(),
        }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || seen[m] {
                return Err(Error::Invalid("not a permutation".into()));
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// The permutation matrix `P` with `P[map[p], p] = 1`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut p = DMatrix::zeros(n, n);
        for (new, &old) in self.map.iter().enumerate() {
            p[(old, new)] = 1.0;
        }
        p
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (new, &old) in self.map.iter().enumerate() {
            inv[old] = new;
        }
        Self { map: inv }
    }

    /// `PᵀMP`, computed by reindexing.
    pub fn conjugate(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |p, q| m[(self.map[p], self.map[q])])
    }
}

/// The permutation taking `L_A(Y)` for `Y = [[X, β], [βᵀ, γ]]` (X of level
/// n, γ of level k) to `[[L_A(X), Λ_A(β)], [Λ_A(βᵀ), L_A(γ)]]` under `PᵀLP`.
pub fn canonical_shuffle(d: usize, n: usize, k: usize) -> Permutation {
    let level = n + k;
    let mut map = Vec::with_capacity(d * level);
    for a in 0..d {
        for x in 0..n {
            map.push(a * level + x);
        }
    }
    for a in 0..d {
        for j in 0..k {
            map.push(a * level + n + j);
        }
    }
    Permutation { map }
}

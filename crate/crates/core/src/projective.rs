//! Homogenization, linear maps of homogeneous tuples and projective maps
//! between free spectrahedra.
//!
//! Pencils passed here are assumed to be minimal defining tuples; this is
//! not checked.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, pinv_sqrt, singular_values, sym_eigen};
use crate::sym::{eval_linear, HomTuple, SymTuple};

/// Eigenvalues of `X₀` below this are a precondition violation.
const PSD_FLOOR: f64 = -1e-10;
/// Relative cutoff for the pseudo-inverse square root.
const PINV_REL: f64 = 1e-12;
/// `|det W| ≤ INVERTIBLE_REL·‖W‖ᵍ⁺¹` counts as singular.
const INVERTIBLE_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveMap {
    w: Vec<Vec<f64>>,
    pub det: f64,
    /// Ratio of extreme singular values; infinite when singular.
    pub condition: f64,
    pub invertible: bool,
}

impl ProjectiveMap {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if w.nrows() != w.ncols() || w.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "map matrix must be square, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        let det = w.determinant();
        let sv = singular_values(&w);
        let top = sv.first().copied().unwrap_or(0.0);
        let bottom = sv.last().copied().unwrap_or(0.0);
        let invertible = det.abs() > INVERTIBLE_REL * top.powi(w.nrows() as i32);
        Ok(Self {
            w: (0..w.nrows()).map(|r| w.row(r).iter().copied().collect()).collect(),
            det,
            condition: if bottom > 0.0 { top / bottom } else { f64::INFINITY },
            invertible,
        })
    }

    pub fn identity(g: usize) -> Self {
        Self::new(DMatrix::identity(g + 1, g + 1)).expect("identity is square")
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let k = self.w.len();
        DMatrix::from_fn(k, k, |r, c| self.w[r][c])
    }

    /// Number of homogeneous coordinates g; the matrix is (g+1)×(g+1).
    pub fn g(&self) -> usize {
        self.w.len() - 1
    }

    pub fn inverse(&self) -> Result<Self> {
        self.ensure_invertible()?;
        let inv = self
            .matrix()
            .try_inverse()
            .ok_or_else(|| Error::Precondition("map matrix is singular".into()))?;
        Self::new(inv)
    }

    /// The map for `W^{-T}`, which carries the pencil `(I, A)` to `(I, B)`.
    pub fn inverse_transpose(&self) -> Result<Self> {
        let inv = self.inverse()?;
        Self::new(inv.matrix().transpose())
    }

    fn ensure_invertible(&self) -> Result<()> {
        if self.invertible {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "map matrix is numerically singular (det {:e})",
                self.det
            )))
        }
    }
}

/// `X ↦ (I, X)`.
pub fn homogenize(x: &SymTuple) -> HomTuple {
    HomTuple::new(DMatrix::identity(x.n(), x.n()), x.clone()).expect("identity matches level")
}

/// `(X₀, X) ↦ X₀^{†/2} X X₀^{†/2}`.
pub fn dehomogenize(h: &HomTuple) -> Result<SymTuple> {
    let x0 = h.inhomogeneous();
    let n = h.n();
    if *x0 == DMatrix::identity(n, n) {
        return Ok(h.rest().clone());
    }
    let lowest = min_eigenvalue(x0);
    if lowest < PSD_FLOOR {
        return Err(Error::Precondition(format!(
            "inhomogeneous component has eigenvalue {lowest:e}"
        )));
    }
    let root = pinv_sqrt(x0, PINV_REL);
    h.rest().conjugate(&root)
}

/// `T_W(X₀, X)ᵢ = Σⱼ W_{ij} Xⱼ` over all g+1 coordinates.
pub fn transform(map: &ProjectiveMap, h: &HomTuple) -> Result<HomTuple> {
    if map.g() != h.g() {
        return Err(Error::Dimension(format!(
            "map acts on {} coordinates, tuple has {}",
            map.g() + 1,
            h.g() + 1
        )));
    }
    let coords = h.coordinates();
    let n = h.n();
    let mixed: Vec<DMatrix<f64>> = map
        .w
        .iter()
        .map(|row| {
            row.iter()
                .zip(&coords)
                .fold(DMatrix::zeros(n, n), |acc, (&w, m)| acc + *m * w)
        })
        .collect();
    Ok(HomTuple::from_full(SymTuple::new(mixed)?))
}

/// Image pencil: `(I, B) = T_{W^{-T}}(I, A)`, returned as the homogeneous
/// pair so the caller can check that the first coordinate is `I`.
pub fn image_pencil(map: &ProjectiveMap, a: &SymTuple) -> Result<HomTuple> {
    transform(&map.inverse_transpose()?, &homogenize(a))
}

/// `P_W(X) = 𝔥⁻¹(T_W(𝔥(X)))`.
pub fn projective_map_point(map: &ProjectiveMap, x: &SymTuple) -> Result<SymTuple> {
    dehomogenize(&transform(map, &homogenize(x))?)
}

/// Samples boundary points of `D_A(1)` along random directions and checks
/// that the inhomogeneous coordinate of `T_W(1, x)` stays positive.
/// Unbounded directions are reported as failures.
pub fn positive_at_level_one<R: Rng + ?Sized>(
    map: &ProjectiveMap,
    a: &SymTuple,
    samples: usize,
    rng: &mut R,
) -> Result<bool> {
    let g = a.g();
    if map.g() != g {
        return Err(Error::Dimension("map and pencil sizes differ".into()));
    }
    let row = &map.w[0];
    for _ in 0..samples {
        let dir: Vec<f64> = (0..g).map(|_| StandardNormal.sample(rng)).collect();
        let lowest = eval_linear(a, &SymTuple::from_scalars(&dir)?)?.min_eigenvalue();
        if lowest >= 0.0 {
            return Ok(false);
        }
        let t = -1.0 / lowest;
        let value = row[0] + row[1..].iter().zip(&dir).map(|(w, v)| w * v * t).sum::<f64>();
        if value <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Boundedness of `D_A` for a pair of 2×2 matrices. Writing `Aᵢ` in the
/// coordinates `u = (a₁₁+a₂₂)/2`, `v = (a₁₁−a₂₂)/2`, `w = a₁₂`, a
/// combination is PSD iff `u ≥ √(v²+w²)`, so the span misses the PSD cone
/// iff `uuᵀ − vvᵀ − wwᵀ` is negative definite.
pub fn bounded_pair(a: &SymTuple) -> Result<bool> {
    Ok(unbounded_pair_direction(a)?.is_none())
}

fn unbounded_pair_direction(a: &SymTuple) -> Result<Option<Vec<f64>>> {
    check_pair(a)?;
    let (u, v, w) = pair_coordinates(a);
    let form = DMatrix::from_fn(2, 2, |i, j| u[i] * u[j] - v[i] * v[j] - w[i] * w[j]);
    let (values, vectors) = sym_eigen(&form);
    let scale = u.iter().chain(&v).chain(&w).fold(0.0_f64, |m, x| m.max(x.abs()));
    if values[1] < -1e-12 * scale * scale {
        return Ok(None);
    }
    let top = vectors.column(1);
    let sign = if u[0] * top[0] + u[1] * top[1] >= 0.0 { 1.0 } else { -1.0 };
    Ok(Some(vec![sign * top[0], sign * top[1]]))
}

fn check_pair(a: &SymTuple) -> Result<()> {
    if a.g() != 2 || a.n() != 2 {
        return Err(Error::Dimension(format!(
            "expected two 2x2 matrices, got g={} d={}",
            a.g(),
            a.n()
        )));
    }
    Ok(())
}

fn pair_coordinates(a: &SymTuple) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let (p, q) = (a.mat(0), a.mat(1));
    (
        [(p[(0, 0)] + p[(1, 1)]) / 2.0, (q[(0, 0)] + q[(1, 1)]) / 2.0],
        [(p[(0, 0)] - p[(1, 1)]) / 2.0, (q[(0, 0)] - q[(1, 1)]) / 2.0],
        [p[(0, 1)], q[(0, 1)]],
    )
}

/// Closed-form determinant of the spin-disk map matrix.
pub fn spin_disk_det(a: &SymTuple) -> Result<f64> {
    check_pair(a)?;
    let (p, q) = (a.mat(0), a.mat(1));
    let (a111, a121, a221) = (p[(0, 0)], p[(0, 1)], p[(1, 1)]);
    let (a112, a122, a222) = (q[(0, 0)], q[(0, 1)], q[(1, 1)]);
    Ok((a111 * a122 - a121 * a112 + a121 * a222 - a221 * a122) / 2.0)
}

/// The map taking a bounded `D_A`, `A ∈ SM₂(ℝ)²`, onto the spin disk.
pub fn spin_disk_map(a: &SymTuple) -> Result<ProjectiveMap> {
    check_pair(a)?;
    let (p, q) = (a.mat(0), a.mat(1));
    let (a121, a122) = (p[(0, 1)], q[(0, 1)]);
    let w = DMatrix::from_row_slice(
        3,
        3,
        &[
            1.0,
            (p[(0, 0)] + p[(1, 1)]) / 2.0,
            (q[(0, 0)] + q[(1, 1)]) / 2.0,
            0.0,
            (p[(0, 0)] - p[(1, 1)]) / 2.0,
            (q[(0, 0)] - q[(1, 1)]) / 2.0,
            0.0,
            a121,
            a122,
        ],
    );
    let map = ProjectiveMap::new(w)?;
    if !map.invertible {
        // a₁₂₂A₁ − a₁₂₁A₂ is then a multiple of I.
        let level = p[(0, 0)] * a122 - a121 * q[(0, 0)];
        if a121 != 0.0 || a122 != 0.0 {
            let sign = if level >= 0.0 { 1.0 } else { -1.0 };
            return Err(Error::Unbounded(vec![sign * a122, -sign * a121]));
        }
    }
    if let Some(dir) = unbounded_pair_direction(a)? {
        return Err(Error::Unbounded(dir));
    }
    Ok(map)
}

/// The spin disk pencil.
pub fn spin_disk() -> SymTuple {
    SymTuple::from_rows(&[
        vec![vec![1.0, 0.0], vec![0.0, -1.0]],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    ])
    .expect("constant pencil")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Degeneracy {
    /// `Σ αᵢAᵢ = 0`, so `D_A` contains a line and has no extreme points.
    NoExtremePoints { witness: Vec<f64> },
    /// The level-one point `α` with `Σ αᵢAᵢ = −I` is the only extreme point.
    UniqueExtreme { point: Vec<f64> },
    Nondegenerate,
}

/// Classifies pencils whose coefficients span, or overfill, `SM_d`.
pub fn degenerate_classify(a: &SymTuple) -> Result<Degeneracy> {
    let d = a.n();
    let g = a.g();
    let dim = d * (d + 1) / 2;
    let mut stacked = DMatrix::zeros(dim, g);
    for (col, m) in a.mats().iter().enumerate() {
        let mut row = 0;
        for i in 0..d {
            for j in i..d {
                stacked[(row, col)] = m[(i, j)];
                row += 1;
            }
        }
    }
    let sv = singular_values(&stacked);
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > 1e-10 * top.max(1.0)).count();
    if rank < g {
        return Ok(Degeneracy::NoExtremePoints {
            witness: right_null_vector(&stacked).iter().copied().collect(),
        });
    }
    if g == dim {
        let mut rhs = nalgebra::DVector::zeros(dim);
        let mut row = 0;
        for i in 0..d {
            for j in i..d {
                rhs[row] = if i == j { -1.0 } else { 0.0 };
                row += 1;
            }
        }
        let point = stacked
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Internal("independent square system is singular".into()))?;
        return Ok(Degeneracy::UniqueExtreme {
            point: point.iter().copied().collect(),
        });
    }
    Ok(Degeneracy::Nondegenerate)
}

/// Unit vector minimizing `‖Mv‖`.
fn right_null_vector(m: &DMatrix<f64>) -> nalgebra::DVector<f64> {
    let gram = m.transpose() * m;
    let (_, vectors) = sym_eigen(&gram);
    vectors.column(0).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: [f64; 3], b: [f64; 3]) -> SymTuple {
        SymTuple::from_rows(&[
            vec![vec![a[0], a[1]], vec![a[1], a[2]]],
            vec![vec![b[0], b[1]], vec![b[1], b[2]]],
        ])
        .unwrap()
    }

    #[test]
    fn homogenize_round_trip_is_exact() {
        let x = SymTuple::from_rows(&[vec![vec![0.1, 0.3], vec![0.3, -0.7]]]).unwrap();
        assert_eq!(dehomogenize(&homogenize(&x)).unwrap(), x);
    }

    #[test]
    fn scaled_inhomogeneous_part() {
        let x = SymTuple::from_rows(&[vec![vec![0.4, 0.2], vec![0.2, 1.0]]]).unwrap();
        let h = HomTuple::new(DMatrix::identity(2, 2) * 4.0, x.clone()).unwrap();
        let back = dehomogenize(&h).unwrap();
        assert!((back.mat(0) - x.mat(0) / 4.0).norm() < 1e-15);
    }

    #[test]
    fn singular_inhomogeneous_part() {
        // diag(1,0)^{†/2} = diag(1,0), so only the (0,0) entry survives.
        let x = SymTuple::from_rows(&[vec![vec![2.0, 3.0], vec![3.0, 5.0]]]).unwrap();
        let h = HomTuple::new(DMatrix::from_diagonal(&nalgebra::dvector![1.0, 0.0]), x).unwrap();
        let back = dehomogenize(&h).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert!((back.mat(0) - expect).norm() < 1e-14);
    }

    #[test]
    fn negative_inhomogeneous_part_rejected() {
        let x = SymTuple::zeros(1, 2);
        let h = HomTuple::new(DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1e-6]), x).unwrap();
        assert!(matches!(dehomogenize(&h), Err(Error::Precondition(_))));
    }

    #[test]
    fn identity_map_fixes_points() {
        let x = SymTuple::from_scalars(&[0.2, -0.4]).unwrap();
        let p = projective_map_point(&ProjectiveMap::identity(2), &x).unwrap();
        assert_eq!(p, x);
    }

    #[test]
    fn spin_disk_maps_to_identity() {
        let map = spin_disk_map(&spin_disk()).unwrap();
        assert_eq!(map.matrix(), DMatrix::identity(3, 3));
    }

    #[test]
    fn closed_form_determinant() {
        let a = pair([1.0, 0.5, -2.0], [0.3, 1.0, 0.2]);
        let map = spin_disk_map(&a).unwrap();
        assert!((spin_disk_det(&a).unwrap() - map.det).abs() < 1e-14);
    }

    #[test]
    fn diagonal_difference_is_unbounded() {
        // a₁₂₂A₁ − a₁₂₁A₂ = diag(1,1): the direction (1,−1) stays feasible.
        let a = pair([2.0, 1.0, 2.0], [1.0, 1.0, 1.0]);
        match spin_disk_map(&a) {
            Err(Error::Unbounded(dir)) => assert_eq!(dir, vec![1.0, -1.0]),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn pair_boundedness() {
        assert!(bounded_pair(&spin_disk()).unwrap());
        assert!(!bounded_pair(&pair([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])).unwrap());
    }

    #[test]
    fn degenerate_examples() {
        let full = SymTuple::from_rows(&[
            vec![vec![1.0, 0.0], vec![0.0, 0.0]],
            vec![vec![0.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        ])
        .unwrap();
        match degenerate_classify(&full).unwrap() {
            Degeneracy::UniqueExtreme { point } => {
                for (p, e) in point.iter().zip([-1.0, -1.0, 0.0]) {
                    assert!((p - e).abs() < 1e-14);
                }
            }
            other => panic!("{other:?}"),
        }
        let scalars = SymTuple::from_scalars(&[1.0, 2.0]).unwrap();
        match degenerate_classify(&scalars).unwrap() {
            Degeneracy::NoExtremePoints { witness } => {
                assert!((witness[0] + 2.0 * witness[1]).abs() < 1e-14);
                assert!(witness[0].abs() > 0.5);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(degenerate_classify(&spin_disk()).unwrap(), Degeneracy::Nondegenerate);
    }
}

//! Exact rational matrices, fraction-free elimination and rational tuples.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{QPoly, Rational};
use crate::error::{Error, Result};
use crate::sym::SymTuple;

/// Dense row-major rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Ragged("rational matrix rows differ in length".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_ints(rows: usize, cols: usize, vals: &[i64]) -> Self {
        assert_eq!(vals.len(), rows * cols, "entry count");
        Self {
            rows,
            cols,
            data: vals.iter().map(|&v| Rational::from_integer(v.into())).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| rat_to_f64(&self[(r, c)]))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension("rational product sizes differ".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * &other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self[(r, c)] == self[(c, r)]))
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        bareiss_echelon(self).pivots.len()
    }

    /// Exact determinant via fraction-free elimination.
    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let e = bareiss_echelon(self);
        if e.pivots.len() < self.rows {
            return Ok(Rational::zero());
        }
        let last = e.rows.last().map_or(BigInt::one(), |row| row[self.cols - 1].clone());
        let sign = if e.swaps.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
        Ok(Rational::new(last * sign, e.scale))
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;

    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        &mut self.data[r * self.cols + c]
    }
}

pub fn rat_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"p"` or a finite decimal literal exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (
            &s[..i],
            s[i + 1..]
                .parse::<i32>()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?,
        ),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}")
        .parse()
        .map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?;
    let shift = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if shift >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-shift) as usize))
    })
}

pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Integer row echelon form from fraction-free elimination.
struct Echelon {
    /// Integer rows; row `i` is the i-th pivot row once elimination ends.
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    swaps: usize,
    /// Product of the per-row denominators cleared before elimination.
    scale: BigInt,
}

/// Bareiss elimination after clearing each row's denominators.
fn bareiss_echelon(m: &RatMatrix) -> Echelon {
    let mut scale = BigInt::one();
    let mut rows: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|r| {
            let row = m.row(r);
            let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            scale *= &lcm;
            row.iter().map(|q| (q * Rational::from_integer(lcm.clone())).to_integer()).collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut swaps = 0;
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            rows.swap(p, r);
            swaps += 1;
        }
        let pivot = rows[r][c].clone();
        for i in r + 1..m.rows {
            let factor = rows[i][c].clone();
            for j in c..m.cols {
                let v = &pivot * &rows[i][j] - &factor * &rows[r][j];
                rows[i][j] = v / &prev;
            }
            for j in 0..c {
                rows[i][j] = BigInt::zero();
            }
        }
        prev = pivot;
        pivots.push(c);
        r += 1;
    }
    Echelon {
        rows,
        pivots,
        swaps,
        scale,
    }
}

/// Reduced row echelon form over ℚ built from the integer echelon form.
fn reduced(m: &RatMatrix) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let e = bareiss_echelon(m);
    let rank = e.pivots.len();
    let mut rows: Vec<Vec<Rational>> = e.rows[..rank]
        .iter()
        .map(|row| row.iter().map(|v| Rational::from_integer(v.clone())).collect())
        .collect();
    for (i, &c) in e.pivots.iter().enumerate().rev() {
        let lead = rows[i][c].clone();
        for v in rows[i].iter_mut() {
            *v /= &lead;
        }
        for k in 0..i {
            let factor = rows[k][c].clone();
            if factor.is_zero() {
                continue;
            }
            for j in c..m.cols {
                let sub = &factor * &rows[i][j];
                rows[k][j] -= sub;
            }
        }
    }
    (rows, e.pivots)
}

/// Exact basis of `{v : Mv = 0}`; free variables set to unit vectors.
pub fn rational_nullspace(m: &RatMatrix) -> Vec<Vec<Rational>> {
    let (rows, pivots) = reduced(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); m.cols];
            v[f] = Rational::one();
            for (row, &p) in rows.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Solution set of `Mx = b`.
#[derive(Debug, Clone, PartialEq)]
pub enum Solutions {
    None,
    Unique(Vec<Rational>),
    Affine {
        particular: Vec<Rational>,
        directions: Vec<Vec<Rational>>,
    },
}

pub fn rational_solve(m: &RatMatrix, b: &[Rational]) -> Result<Solutions> {
    if b.len() != m.rows {
        return Err(Error::Dimension(format!(
            "right-hand side has {} entries for {} rows",
            b.len(),
            m.rows
        )));
    }
    let mut aug = RatMatrix::zeros(m.rows, m.cols + 1);
    for r in 0..m.rows {
        for c in 0..m.cols {
            aug[(r, c)] = m[(r, c)].clone();
        }
        aug[(r, m.cols)] = b[r].clone();
    }
    let (rows, pivots) = reduced(&aug);
    if pivots.last() == Some(&m.cols) {
        return Ok(Solutions::None);
    }
    let mut particular = vec![Rational::zero(); m.cols];
    for (row, &p) in rows.iter().zip(&pivots) {
        particular[p] = row[m.cols].clone();
    }
    let directions = rational_nullspace(m);
    Ok(if directions.is_empty() {
        Solutions::Unique(particular)
    } else {
        Solutions::Affine {
            particular,
            directions,
        }
    })
}

/// A g-tuple of exactly symmetric rational matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalTuple {
    n: usize,
    mats: Vec<RatMatrix>,
}

impl RationalTuple {
    pub fn new(mats: Vec<RatMatrix>) -> Result<Self> {
        let n = mats.first().map(RatMatrix::rows).ok_or(Error::Empty("rational tuple"))?;
        for (i, m) in mats.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!("coordinate {i} is not {n}x{n}")));
            }
            for r in 0..n {
                for c in r + 1..n {
                    if m[(r, c)] != m[(c, r)] {
                        let diff = rat_to_f64(&(&m[(r, c)] - &m[(c, r)])).abs();
                        return Err(Error::Asymmetric {
                            index: i,
                            row: r,
                            col: c,
                            diff,
                        });
                    }
                }
            }
        }
        Ok(Self { n, mats })
    }

    pub fn from_ints(n: usize, mats: &[&[i64]]) -> Result<Self> {
        Self::new(mats.iter().map(|m| RatMatrix::from_ints(n, n, m)).collect())
    }

    pub fn g(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[RatMatrix] {
        &self.mats
    }

    pub fn mat(&self, i: usize) -> &RatMatrix {
        &self.mats[i]
    }

    pub fn to_f64(&self) -> SymTuple {
        SymTuple::new(self.mats.iter().map(RatMatrix::to_f64).collect()).expect("exactly symmetric")
    }

    /// `I + Σ Aᵢ ⊗ Xᵢ`, entry `(a·n+x, b·n+y)`.
    pub fn pencil(&self, x: &RationalTuple) -> Result<RatMatrix> {
        if self.g() != x.g() {
            return Err(Error::Dimension("pencil and point differ in g".into()));
        }
        let (d, n) = (self.n, x.n);
        let mut out = RatMatrix::identity(d * n);
        for (a, xm) in self.mats.iter().zip(&x.mats) {
            for ra in 0..d {
                for ca in 0..d {
                    let coef = &a[(ra, ca)];
                    if coef.is_zero() {
                        continue;
                    }
                    for rx in 0..n {
                        for cx in 0..n {
                            out[(ra * n + rx, ca * n + cx)] += coef * &xm[(rx, cx)];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Entry strings, `"p/q"` or integers.
    pub fn to_strings(&self) -> Vec<Vec<Vec<String>>> {
        self.mats
            .iter()
            .map(|m| (0..self.n).map(|r| m.row(r).iter().map(format_rational).collect()).collect())
            .collect()
    }

    pub fn from_strings(rows: &[Vec<Vec<String>>]) -> Result<Self> {
        let mats = rows
            .iter()
            .map(|m| {
                RatMatrix::from_rows(
                    m.iter()
                        .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                        .collect::<Result<Vec<_>>>()?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mats)
    }
}

impl Serialize for RationalTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Vec<String>>>::deserialize(d)?;
        Self::from_strings(&rows).map_err(serde::de::Error::custom)
    }
}

/// A symmetric tuple whose entries are polynomials in one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTuple {
    n: usize,
    mats: Vec<Vec<Vec<QPoly>>>,
}

impl ParamTuple {
    pub fn new(mats: Vec<Vec<Vec<QPoly>>>) -> Result<Self> {
        let n = mats.first().map(Vec::len).ok_or(Error::Empty("parametric tuple"))?;
        for (i, m) in mats.iter().enumerate() {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(Error::Dimension(format!("coordinate {i} is not {n}x{n}")));
            }
            for r in 0..n {
                for c in r + 1..n {
                    if m[r][c] != m[c][r] {
                        return Err(Error::Asymmetric {
                            index: i,
                            row: r,
                            col: c,
                            diff: f64::NAN,
                        });
                    }
                }
            }
        }
        Ok(Self { n, mats })
    }

    /// `[[X, tβ], [tβᵀ, 0]]` for a level-n rational `X` and columns `β`.
    pub fn one_step_dilation(x: &RationalTuple, beta: &[Vec<Rational>]) -> Result<Self> {
        let n = x.n();
        if beta.len() != x.g() || beta.iter().any(|b| b.len() != n) {
            return Err(Error::Dimension("dilation columns do not match the tuple".into()));
        }
        let mats = x
            .mats()
            .iter()
            .zip(beta)
            .map(|(m, b)| {
                let mut out = vec![vec![QPoly::zero(); n + 1]; n + 1];
                for r in 0..n {
                    for c in 0..n {
                        out[r][c] = QPoly::constant(m[(r, c)].clone());
                    }
                    let entry = QPoly::monomial(b[r].clone(), 1);
                    out[r][n] = entry.clone();
                    out[n][r] = entry;
                }
                out
            })
            .collect();
        Self::new(mats)
    }

    pub fn g(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[Vec<Vec<QPoly>>] {
        &self.mats
    }

    /// `L_A(Y(t))` with polynomial entries.
    pub fn pencil(&self, a: &RationalTuple) -> Result<Vec<Vec<QPoly>>> {
        if a.g() != self.g() {
            return Err(Error::Dimension("pencil and point differ in g".into()));
        }
        let (d, n) = (a.n(), self.n);
        let mut out = vec![vec![QPoly::zero(); d * n]; d * n];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = QPoly::one();
        }
        for (am, ym) in a.mats().iter().zip(&self.mats) {
            for ra in 0..d {
                for ca in 0..d {
                    let coef = &am[(ra, ca)];
                    if coef.is_zero() {
                        continue;
                    }
                    for rx in 0..n {
                        for cx in 0..n {
                            let cell = &mut out[ra * n + rx][ca * n + cx];
                            *cell = std::mem::take(cell) + ym[rx][cx].scale(coef);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Floating tuple at a given parameter value.
    pub fn eval_f64(&self, t: f64) -> SymTuple {
        let mats = self
            .mats
            .iter()
            .map(|m| {
                DMatrix::from_fn(self.n, self.n, |r, c| {
                    m[r][c]
                        .coeffs()
                        .iter()
                        .rev()
                        .fold(0.0, |acc, q| acc * t + rat_to_f64(q))
                })
            })
            .collect();
        SymTuple::new(mats).expect("exactly symmetric")
    }

    /// Coefficient strings, lowest degree first.
    pub fn to_strings(&self) -> Vec<Vec<Vec<Vec<String>>>> {
        self.mats
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| row.iter().map(|p| p.coeffs().iter().map(format_rational).collect()).collect())
                    .collect()
            })
            .collect()
    }

    pub fn from_strings(rows: &[Vec<Vec<Vec<String>>>]) -> Result<Self> {
        let mats = rows
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| {
                        row.iter()
                            .map(|cs| {
                                Ok(QPoly::new(cs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mats)
    }
}

impl Serialize for ParamTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParamTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Vec<Vec<String>>>>::deserialize(d)?;
        Self::from_strings(&rows).map_err(serde::de::Error::custom)
    }
}

/// Sign of a rational as -1, 0 or 1.
pub fn rat_sign(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Plain Gauss-Jordan over ℚ with rational pivots throughout.
    fn oracle_rank(m: &RatMatrix) -> usize {
        let mut a: Vec<Vec<Rational>> = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
        let mut rank = 0;
        for c in 0..m.cols() {
            let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(p, rank);
            for i in 0..a.len() {
                if i != rank && !a[i][c].is_zero() {
                    let f = &a[i][c] / &a[rank][c];
                    for j in 0..m.cols() {
                        let sub = &f * &a[rank][j];
                        a[i][j] -= sub;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn identity_system() {
        let m = RatMatrix::identity(3);
        let zero = vec![Rational::zero(); 3];
        assert_eq!(rational_solve(&m, &zero).unwrap(), Solutions::Unique(zero.clone()));
        assert!(rational_nullspace(&m).is_empty());
    }

    #[test]
    fn rank_one_nullspace() {
        let m = RatMatrix::from_ints(2, 2, &[1, 2, 2, 4]);
        let ns = rational_nullspace(&m);
        assert_eq!(ns, vec![vec![q(-2, 1), q(1, 1)]]);
    }

    #[test]
    fn inconsistent_system() {
        let m = RatMatrix::from_ints(2, 2, &[1, 2, 2, 4]);
        assert_eq!(rational_solve(&m, &[q(1, 1), q(3, 1)]).unwrap(), Solutions::None);
    }

    #[test]
    fn affine_solutions_solve() {
        let m = RatMatrix::from_rows(vec![vec![q(1, 2), q(1, 3), q(0, 1)], vec![q(1, 1), q(2, 3), q(1, 5)]]).unwrap();
        let b = vec![q(1, 1), q(7, 3)];
        match rational_solve(&m, &b).unwrap() {
            Solutions::Affine {
                particular,
                directions,
            } => {
                assert_eq!(m.mul_vec(&particular), b);
                assert_eq!(directions.len(), 1);
                assert!(m.mul_vec(&directions[0]).iter().all(Zero::is_zero));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn determinant_and_rank_match_oracle() {
        let m = RatMatrix::from_rows(vec![
            vec![q(2, 3), q(-1, 2), q(5, 1)],
            vec![q(1, 7), q(4, 1), q(-3, 2)],
            vec![q(0, 1), q(1, 9), q(2, 5)],
        ])
        .unwrap();
        let det = m.determinant().unwrap();
        let expect = q(2, 3) * (q(4, 1) * q(2, 5) - q(-3, 2) * q(1, 9)) - q(-1, 2) * (q(1, 7) * q(2, 5))
            + q(5, 1) * (q(1, 7) * q(1, 9));
        assert_eq!(det, expect);
        assert_eq!(m.rank(), oracle_rank(&m));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("-3/6").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("0.27").unwrap(), q(27, 100));
        assert_eq!(parse_rational("1.5e2").unwrap(), q(150, 1));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn rational_pencil_matches_float() {
        let a = RationalTuple::from_ints(2, &[&[1, 0, 0, -1], &[0, 1, 1, 0]]).unwrap();
        let x = RationalTuple::new(vec![
            RatMatrix::from_rows(vec![vec![q(1, 2), q(1, 3)], vec![q(1, 3), q(0, 1)]]).unwrap(),
            RatMatrix::from_rows(vec![vec![q(1, 5), q(0, 1)], vec![q(0, 1), q(-1, 4)]]).unwrap(),
        ])
        .unwrap();
        let exact = a.pencil(&x).unwrap().to_f64();
        let float = crate::sym::eval_pencil(&a.to_f64(), &x.to_f64()).unwrap();
        assert!((exact - float.matrix()).norm() < 1e-15);
    }
}

//! Division-free characteristic polynomials and the parametric family
//! `χ_α(t) = det(L_A(Y(α)) − tI)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::matrix::{ParamTuple, RatMatrix, RationalTuple};
use super::poly::{QPoly, Rational, Ring, ZPoly};
use crate::error::{Error, Result};

/// Coefficients of `det(tI − M)`, lowest degree first (Berkowitz).
pub fn berkowitz<R: Ring>(m: &[Vec<R>]) -> Result<Vec<R>> {
    let size = m.len();
    if m.iter().any(|row| row.len() != size) {
        return Err(Error::Dimension("characteristic polynomial of a non-square matrix".into()));
    }
    // Highest degree first while iterating.
    let mut p = vec![R::one()];
    for k in 0..size {
        let a = m[k][k].clone();
        let mut q = Vec::with_capacity(k + 2);
        q.push(R::one());
        q.push(-a);
        let mut v: Vec<R> = (0..k).map(|i| m[i][k].clone()).collect();
        for _ in 0..k {
            let rv = (0..k).fold(R::zero(), |acc, j| acc + m[k][j].clone() * v[j].clone());
            q.push(-rv);
            v = (0..k)
                .map(|i| (0..k).fold(R::zero(), |acc, j| acc + m[i][j].clone() * v[j].clone()))
                .collect();
        }
        let next: Vec<R> = (0..=k + 1)
            .map(|i| {
                (0..=i.min(k))
                    .filter(|&j| i - j < q.len())
                    .fold(R::zero(), |acc, j| acc + q[i - j].clone() * p[j].clone())
            })
            .collect();
        p = next;
    }
    p.reverse();
    Ok(p)
}

/// Exact `det(M − tI)` over ℚ, lowest degree first.
pub fn rational_char_poly(m: &RatMatrix) -> Result<QPoly> {
    let rows: Vec<Vec<Rational>> = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
    let mut c = berkowitz(&rows)?;
    if m.rows() % 2 == 1 {
        c = c.into_iter().map(|v| -v).collect();
    }
    Ok(QPoly::new(c))
}

/// `χ(t) = det(L − tI) = Σ cₖ(α) tᵏ` with each `cₖ` a polynomial in `α`
/// containing only even powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCharPoly {
    pub size: usize,
    /// Indexed by the power of `t`.
    pub coeffs: Vec<QPoly>,
}

impl ParamCharPoly {
    pub fn coeff(&self, k: usize) -> QPoly {
        self.coeffs.get(k).cloned().unwrap_or_else(QPoly::zero)
    }

    /// `dχ/dt` at `t = 0`.
    pub fn p1(&self) -> QPoly {
        self.coeff(1)
    }

    /// `d²χ/dt²` at `t = 0`.
    pub fn p2(&self) -> QPoly {
        self.coeff(2).scale(&Rational::from_integer(2.into()))
    }

    /// Coefficients rewritten as polynomials in `s = α²`.
    pub fn in_alpha_squared(&self) -> Vec<QPoly> {
        self.coeffs
            .iter()
            .map(|c| c.even_part_only().expect("checked at construction"))
            .collect()
    }

    /// Largest degree in `α²` over all coefficients.
    pub fn alpha_squared_degree(&self) -> usize {
        self.in_alpha_squared()
            .iter()
            .filter_map(QPoly::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn t_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Characteristic polynomial of `L_A(Y(α))` for a parametric point.
pub fn char_poly_param(a: &RationalTuple, y: &ParamTuple) -> Result<ParamCharPoly> {
    let pencil = y.pencil(a)?;
    let size = pencil.len();
    let denom = pencil
        .iter()
        .flatten()
        .flat_map(|p| p.coeffs().iter())
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled: Vec<Vec<ZPoly>> = pencil
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| p.map(|c| (c * Rational::from_integer(denom.clone())).to_integer()))
                .collect()
        })
        .collect();
    // det(tI − D·L) = Dᴺ det((t/D)I − L), so coefficient k carries D^{N−k}.
    let scaled_coeffs = berkowitz(&scaled)?;
    let sign = if size % 2 == 1 { -Rational::one() } else { Rational::one() };
    let coeffs: Vec<QPoly> = scaled_coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let factor = Rational::from_integer(num_traits::pow(denom.clone(), size - k)).recip();
            QPoly::from_zpoly(c).scale(&(factor * sign.clone()))
        })
        .collect();
    for (k, c) in coeffs.iter().enumerate() {
        if c.even_part_only().is_none() {
            return Err(Error::Internal(format!(
                "coefficient of t^{k} contains an odd power of the dilation parameter"
            )));
        }
    }
    Ok(ParamCharPoly { size, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::matrix::RatMatrix;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn two_by_two() {
        let m = RatMatrix::from_ints(2, 2, &[1, 2, 3, 4]);
        // det(M − tI) = t² − 5t − 2
        assert_eq!(rational_char_poly(&m).unwrap(), QPoly::from_ints(&[-2, -5, 1]));
    }

    #[test]
    fn three_by_three_matches_expansion() {
        let m = RatMatrix::from_ints(3, 3, &[2, -1, 0, 4, 3, 1, -2, 5, 7]);
        let c = rational_char_poly(&m).unwrap();
        assert_eq!(c.coeff(0), m.determinant().unwrap());
        assert_eq!(c.coeff(3), q(-1, 1));
        assert_eq!(c.coeff(2), q(12, 1));
    }

    #[test]
    fn zero_direction_factors() {
        // β = 0: χ = det(L_A(X) − tI)·(1−t)ᵈ.
        let a = RationalTuple::from_ints(2, &[&[1, 0, 0, -1], &[0, 1, 1, 0]]).unwrap();
        let x = RationalTuple::new(vec![
            RatMatrix::from_rows(vec![vec![q(1, 3)]]).unwrap(),
            RatMatrix::from_rows(vec![vec![q(1, 4)]]).unwrap(),
        ])
        .unwrap();
        let zero = vec![vec![Rational::zero()]; 2];
        let y = ParamTuple::one_step_dilation(&x, &zero).unwrap();
        let chi = char_poly_param(&a, &y).unwrap();
        let base = rational_char_poly(&a.pencil(&x).unwrap()).unwrap();
        let one_minus_t = QPoly::from_ints(&[1, -1]);
        let expect = base * one_minus_t.clone() * one_minus_t;
        for k in 0..=4 {
            assert_eq!(chi.coeff(k), QPoly::constant(expect.coeff(k)));
        }
        assert_eq!(chi.alpha_squared_degree(), 0);
    }
}

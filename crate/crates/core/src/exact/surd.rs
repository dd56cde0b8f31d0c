//! Exact arithmetic in `ℚ(√p₁, …, √pₘ)` for pairwise coprime squarefree
//! generators, with signs decided by rational interval enclosures.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::algebraic::Interval;
use super::matrix::rat_sign;
use super::poly::Rational;
use crate::error::{Error, Result};

/// Starting enclosure precision; 200 bits is just over 60 decimal digits.
pub const DEFAULT_BITS: u32 = 200;
const MAX_BITS: u32 = 1 << 14;

#[derive(Debug, PartialEq, Eq)]
pub struct QuadField {
    generators: Vec<u64>,
}

impl QuadField {
    pub fn new(generators: Vec<u64>) -> Result<Arc<Self>> {
        for (i, &a) in generators.iter().enumerate() {
            if a < 2 || !squarefree(a) {
                return Err(Error::Invalid(format!("generator {a} is not squarefree")));
            }
            for &b in &generators[i + 1..] {
                if num_integer::gcd(a, b) != 1 {
                    return Err(Error::Invalid(format!("generators {a} and {b} share a factor")));
                }
            }
        }
        if generators.len() > 16 {
            return Err(Error::Invalid("too many generators".into()));
        }
        Ok(Arc::new(Self { generators }))
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    /// Dimension over ℚ.
    pub fn degree(&self) -> usize {
        1 << self.generators.len()
    }

    /// Squarefree radicand `Π_{i∈mask} pᵢ`.
    fn radicand(&self, mask: usize) -> BigInt {
        self.generators
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(BigInt::one(), |acc, (_, &p)| acc * p)
    }
}

fn squarefree(mut n: u64) -> bool {
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f * f) {
            return false;
        }
        if n.is_multiple_of(f) {
            n /= f;
        }
        f += 1;
    }
    true
}

/// Element `Σ_mask c_mask √(Π_{i∈mask} pᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surd {
    field: Arc<QuadField>,
    coeffs: Vec<Rational>,
}

impl Surd {
    pub fn zero(field: &Arc<QuadField>) -> Self {
        Self {
            field: field.clone(),
            coeffs: vec![Rational::zero(); field.degree()],
        }
    }

    pub fn rational(field: &Arc<QuadField>, q: Rational) -> Self {
        let mut s = Self::zero(field);
        s.coeffs[0] = q;
        s
    }

    pub fn int(field: &Arc<QuadField>, v: i64) -> Self {
        Self::rational(field, Rational::from_integer(v.into()))
    }

    /// `q·√r` for a product `r` of generators.
    pub fn root_term(field: &Arc<QuadField>, q: Rational, radicand: u64) -> Result<Self> {
        let mut mask = 0;
        let mut rest = radicand;
        for (i, &p) in field.generators.iter().enumerate() {
            if rest.is_multiple_of(p) {
                rest /= p;
                mask |= 1 << i;
            }
        }
        if rest != 1 {
            return Err(Error::Invalid(format!("√{radicand} is not in the field")));
        }
        let mut s = Self::zero(field);
        s.coeffs[mask] = q;
        Ok(s)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(&self.field);
        for (s, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (t, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                // √S·√T = (Π_{S∩T} p)·√(S△T).
                let square = Rational::from_integer(self.field.radicand(s & t));
                out.coeffs[s ^ t] += a * b * square;
            }
        }
        out
    }

    /// Image under `√pᵢ ↦ −√pᵢ` for the generators in `flip`.
    fn conjugate(&self, flip: usize) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| if (m & flip).count_ones() % 2 == 1 { -c } else { c.clone() })
                .collect(),
        }
    }

    /// Multiplicative inverse via the product of the other conjugates.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Invalid("inverse of zero".into()));
        }
        let others = (1..self.field.degree()).fold(Self::int(&self.field, 1), |acc, f| acc.mul(&self.conjugate(f)));
        let norm = self.mul(&others);
        debug_assert!(norm.coeffs[1..].iter().all(Zero::is_zero));
        Ok(others.scale(&norm.coeffs[0].recip()))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inverse()?))
    }

    /// Rational enclosure with every radical bracketed to `2^{-bits}`.
    pub fn enclose(&self, bits: u32) -> Interval {
        let mut acc = Interval::point(Rational::zero());
        for (mask, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let root = sqrt_enclosure(&self.field.radicand(mask), bits);
            acc = acc.add(&root.mul(&Interval::point(c.clone())));
        }
        acc
    }

    /// Exact sign: zero is detected symbolically, nonzero values by
    /// enclosures starting at `min_bits` and doubling. Returns the sign
    /// and the precision that settled it.
    pub fn sign(&self, min_bits: u32) -> Result<(i32, u32)> {
        if self.is_zero() {
            return Ok((0, min_bits));
        }
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            return Ok((rat_sign(&self.coeffs[0]), min_bits));
        }
        let mut bits = min_bits.max(16);
        while bits <= MAX_BITS {
            let s = self.enclose(bits).strict_sign();
            if s != 0 {
                return Ok((s, bits));
            }
            bits *= 2;
        }
        Err(Error::Internal("surd sign did not settle".into()))
    }

    pub fn to_f64(&self) -> f64 {
        let e = self.enclose(80);
        super::matrix::rat_to_f64(&((e.lo + e.hi) / Rational::from_integer(2.into())))
    }

    pub fn field(&self) -> &Arc<QuadField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }
}

/// `[⌊√(n·4ᵇ)⌋, ⌊√(n·4ᵇ)⌋+1] / 2ᵇ`.
fn sqrt_enclosure(n: &BigInt, bits: u32) -> Interval {
    if n.is_one() {
        return Interval::point(Rational::one());
    }
    let scaled: BigInt = n << (2 * bits as usize);
    let floor = scaled.sqrt();
    let den = BigInt::one() << bits as usize;
    let lo = Rational::new(floor.clone(), den.clone());
    let hi = if &floor * &floor == scaled {
        lo.clone()
    } else {
        Rational::new(floor + 1, den)
    };
    debug_assert!(!lo.is_negative());
    Interval { lo, hi }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn products_reduce() {
        let f = QuadField::new(vec![3, 5]).unwrap();
        let r3 = Surd::root_term(&f, q(1, 1), 3).unwrap();
        let r15 = Surd::root_term(&f, q(1, 1), 15).unwrap();
        assert_eq!(r3.mul(&r3), Surd::int(&f, 3));
        assert_eq!(r3.mul(&r15), Surd::root_term(&f, q(3, 1), 5).unwrap());
    }

    #[test]
    fn inverse_round_trip() {
        let f = QuadField::new(vec![2, 3]).unwrap();
        let x = Surd::int(&f, 1)
            .add(&Surd::root_term(&f, q(2, 1), 2).unwrap())
            .sub(&Surd::root_term(&f, q(1, 3), 6).unwrap());
        let y = x.inverse().unwrap();
        assert_eq!(x.mul(&y), Surd::int(&f, 1));
    }

    #[test]
    fn signs() {
        let f = QuadField::new(vec![2]).unwrap();
        let s = Surd::root_term(&f, q(1, 1), 2).unwrap().sub(&Surd::rational(&f, q(7, 5)));
        assert_eq!(s.sign(64).unwrap().0, 1);
        let close = Surd::root_term(&f, q(1, 1), 2)
            .unwrap()
            .sub(&Surd::rational(&f, q(141421356237309505, 100000000000000000)));
        // √2 = 1.41421356237309504880…
        assert_eq!(close.sign(16).unwrap().0, -1);
    }

    #[test]
    fn rejects_shared_factors() {
        assert!(QuadField::new(vec![6, 10]).is_err());
        assert!(QuadField::new(vec![12]).is_err());
    }
}

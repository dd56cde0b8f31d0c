//! Sturm sequences, real-root isolation and real algebraic numbers given
//! by a defining polynomial and an isolating interval.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::{format_rational, parse_rational, rat_sign, rat_to_f64};
use super::poly::{QPoly, Rational, ZPoly};
use crate::error::{Error, Result};

/// Refinement cap for sign decisions.
const MAX_REFINEMENTS: usize = 4096;

/// Sturm chain of a polynomial; counts distinct real roots.
#[derive(Debug, Clone)]
pub struct SturmChain {
    chain: Vec<QPoly>,
}

impl SturmChain {
    pub fn new(p: &QPoly) -> Self {
        let mut chain = vec![p.clone()];
        if p.degree().unwrap_or(0) > 0 {
            chain.push(p.derivative());
            loop {
                let k = chain.len();
                let (_, r) = chain[k - 2].div_rem(&chain[k - 1]);
                if r.is_zero() {
                    break;
                }
                chain.push(-r);
            }
        }
        Self { chain }
    }

    fn variations(signs: impl Iterator<Item = i32>) -> usize {
        let mut last = 0;
        let mut count = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    fn at(&self, x: &Rational) -> usize {
        Self::variations(self.chain.iter().map(|p| rat_sign(&p.eval(x))))
    }

    fn at_infinity(&self, positive: bool) -> usize {
        Self::variations(self.chain.iter().map(|p| {
            let lead = p.leading().map_or(0, rat_sign);
            let odd = p.degree().unwrap_or(0) % 2 == 1;
            if !positive && odd {
                -lead
            } else {
                lead
            }
        }))
    }

    /// Distinct real roots in `(lo, hi]`; `None` bounds mean ∓∞.
    pub fn count(&self, lo: Option<&Rational>, hi: Option<&Rational>) -> usize {
        if self.chain[0].is_zero() {
            return 0;
        }
        let a = lo.map_or_else(|| self.at_infinity(false), |x| self.at(x));
        let b = hi.map_or_else(|| self.at_infinity(true), |x| self.at(x));
        a.saturating_sub(b)
    }
}

/// Bound on the absolute value of every real root.
pub fn cauchy_bound(p: &QPoly) -> Rational {
    let Some(lead) = p.leading() else {
        return Rational::zero();
    };
    let top = p.coeffs()[..p.coeffs().len() - 1]
        .iter()
        .map(|c| (c / lead).abs())
        .fold(Rational::zero(), |m, v| if v > m { v } else { m });
    Rational::one() + top
}

/// Disjoint intervals `(lo, hi]`, each holding exactly one distinct real
/// root of `p`, covering all roots in the given range, in increasing order.
/// Open ends default to the root bound.
pub fn sturm_isolate(p: &QPoly, lo: Option<Rational>, hi: Option<Rational>) -> Vec<(Rational, Rational)> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let bound = cauchy_bound(p);
    let lo = lo.unwrap_or_else(|| -bound.clone());
    let hi = hi.unwrap_or(bound);
    if lo >= hi {
        return Vec::new();
    }
    let chain = SturmChain::new(p);
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        let n = chain.count(Some(&a), Some(&b));
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push((a, b));
            continue;
        }
        let mid = (&a + &b) / Rational::from_integer(2.into());
        stack.push((mid.clone(), b));
        stack.push((a, mid));
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(x: Rational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().expect("four products").clone();
        let hi = c.iter().max().expect("four products").clone();
        Self { lo, hi }
    }

    /// 1, -1 or 0 when the interval straddles or touches zero.
    pub fn strict_sign(&self) -> i32 {
        if self.lo.is_positive() {
            1
        } else if self.hi.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Horner enclosure of `p` over an interval.
pub fn eval_interval(p: &QPoly, x: &Interval) -> Interval {
    p.coeffs()
        .iter()
        .rev()
        .fold(Interval::point(Rational::zero()), |acc, c| {
            acc.mul(x).add(&Interval::point(c.clone()))
        })
}

/// The unique root of a square-free integer polynomial inside
/// `[lo, hi]`, with `p(lo)·p(hi) < 0` or `lo = hi` a root.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicNumber {
    defining: ZPoly,
    lo: Rational,
    hi: Rational,
}

impl AlgebraicNumber {
    /// The root of `defining` in `(lo, hi]`; the polynomial is reduced to
    /// its square-free primitive part.
    pub fn new(defining: &QPoly, lo: Rational, hi: Rational) -> Result<Self> {
        let sf = defining.square_free();
        if sf.degree().unwrap_or(0) == 0 {
            return Err(Error::Invalid("defining polynomial has no roots".into()));
        }
        let count = SturmChain::new(&sf).count(Some(&lo), Some(&hi));
        if count != 1 {
            return Err(Error::Invalid(format!(
                "interval holds {count} roots of the defining polynomial"
            )));
        }
        let mut out = Self {
            defining: sf.to_primitive(),
            lo,
            hi,
        };
        out.normalize();
        Ok(out)
    }

    /// Smallest root in `(0, ∞)`, if any.
    pub fn smallest_positive_root(p: &QPoly) -> Result<Option<Self>> {
        let sf = p.square_free();
        let roots = sturm_isolate(&sf, Some(Rational::zero()), None);
        roots
            .into_iter()
            .next()
            .map(|(lo, hi)| Self::new(&sf, lo, hi))
            .transpose()
    }

    /// Moves endpoints off roots so the sign-change invariant holds.
    fn normalize(&mut self) {
        let p = self.defining_q();
        if p.eval(&self.hi).is_zero() {
            self.lo = self.hi.clone();
            return;
        }
        let chain = SturmChain::new(&p);
        while p.eval(&self.lo).is_zero() {
            let mid = self.midpoint();
            if chain.count(Some(&self.lo), Some(&mid)) == 1 {
                self.hi = mid;
                if p.eval(&self.hi).is_zero() {
                    self.lo = self.hi.clone();
                    return;
                }
            } else {
                self.lo = mid;
            }
        }
    }

    pub fn defining(&self) -> &ZPoly {
        &self.defining
    }

    pub fn defining_q(&self) -> QPoly {
        QPoly::from_zpoly(&self.defining)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_rational(&self) -> bool {
        self.lo == self.hi
    }

    fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    /// Halves the interval.
    pub fn refine(&mut self) {
        if self.is_rational() {
            return;
        }
        let p = self.defining_q();
        let mid = self.midpoint();
        let s_mid = rat_sign(&p.eval(&mid));
        if s_mid == 0 {
            self.lo = mid.clone();
            self.hi = mid;
        } else if s_mid == rat_sign(&p.eval(&self.lo)) {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
    }

    pub fn refine_times(&mut self, r: usize) {
        for _ in 0..r {
            self.refine();
        }
    }

    pub fn refine_to(&mut self, width: &Rational) {
        while &self.width() > width {
            self.refine();
        }
    }

    pub fn to_f64(&self) -> f64 {
        let mut c = self.clone();
        c.refine_to(&Rational::new(BigInt::one(), BigInt::one() << 60));
        rat_to_f64(&c.midpoint())
    }

    /// Whether `q(α) = 0`, decided through `gcd(defining, q)`.
    pub fn is_root_of(&self, q: &QPoly) -> bool {
        if q.is_zero() {
            return true;
        }
        let g = self.defining_q().gcd(q);
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        if self.is_rational() {
            return g.eval(&self.lo).is_zero();
        }
        SturmChain::new(&g).count(Some(&self.lo), Some(&self.hi)) > 0
    }

    /// Exact sign of `q(α)`; refines this number as needed.
    pub fn sign_of(&mut self, q: &QPoly) -> Result<i32> {
        if self.is_root_of(q) {
            return Ok(0);
        }
        for _ in 0..MAX_REFINEMENTS {
            if self.is_rational() {
                return Ok(rat_sign(&q.eval(&self.lo)));
            }
            let s = eval_interval(q, &self.interval()).strict_sign();
            if s != 0 {
                return Ok(s);
            }
            self.refine();
        }
        Err(Error::Internal("sign decision did not settle".into()))
    }

    pub fn to_record(&self) -> AlgebraicRecord {
        AlgebraicRecord {
            defining: self.defining.coeffs().iter().map(ToString::to_string).collect(),
            lo: format_rational(&self.lo),
            hi: format_rational(&self.hi),
        }
    }

    pub fn from_record(r: &AlgebraicRecord) -> Result<Self> {
        let coeffs = r
            .defining
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|_| Error::Parse(format!("bad coefficient {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            &QPoly::from_zpoly(&ZPoly::new(coeffs)),
            parse_rational(&r.lo)?,
            parse_rational(&r.hi)?,
        )
    }
}

/// Serialized algebraic number: integer coefficients, lowest degree first,
/// and exact interval endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicRecord {
    pub defining: Vec<String>,
    pub lo: String,
    pub hi: String,
}

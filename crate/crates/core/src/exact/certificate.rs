//! Certificates for matrix extreme points that are not Arveson extreme,
//! and their verification.
//!
//! Parametric certificates carry `Y(α)` with entries in `ℚ[α]` and `α` as
//! an algebraic number. Kernel dimension and membership are decided
//! exactly from `χ_α(t) = det(L_A(Y(α)) − tI)`; matrix extremality is
//! backed by singular values of the floating equation matrix.
//!
//! Radical certificates handle diagonal pencils whose point lives in a
//! multiquadratic field; every 2×2 block of the pencil is checked exactly.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::algebraic::{AlgebraicNumber, AlgebraicRecord};
use super::charpoly::char_poly_param;
use super::matrix::{format_rational, parse_rational, ParamTuple, RatMatrix, RationalTuple};
use super::poly::{QPoly, Rational};
use super::surd::{QuadField, Surd, DEFAULT_BITS};
use crate::error::{Error, Result};
use crate::extreme::{classify, matrix_extreme_system, rank_nullity_counts, Flag};
use crate::kernel::ToleranceConfig;
use crate::linalg::{singular_values, sym_eigen};
use crate::sym::{eval_pencil, SymTuple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericClaim {
    pub sigma_min: f64,
    pub sigma_min_tol: f64,
    pub sigma_max_below: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claims {
    pub in_da: bool,
    pub kernel_dim: usize,
    pub not_arveson: bool,
    pub matrix_extreme_numeric: Option<NumericClaim>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamCertificate {
    pub a: RationalTuple,
    pub y: ParamTuple,
    pub alpha: AlgebraicRecord,
    pub claims: Claims,
}

/// One `q·√r` term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurdTerm {
    pub radicand: u64,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadicalClaims {
    pub in_da: bool,
    pub kernel_dim: usize,
    pub matrix: bool,
    pub not_arveson: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadicalCertificate {
    pub generators: Vec<u64>,
    /// Diagonals of the pencil coefficients.
    pub a_diagonals: Vec<Vec<String>>,
    /// `x[i][r][c]` is a sum of surd terms.
    pub x: Vec<Vec<Vec<Vec<SurdTerm>>>>,
    pub claims: RadicalClaims,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Parametric(ParamCertificate),
    Radical(RadicalCertificate),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<ClaimCheck>,
    pub kernel_dim: usize,
    pub sigma_min: Option<f64>,
    pub sigma_max: Option<f64>,
    /// Decimal digits of the enclosures behind the sign decisions.
    pub precision_digits: Option<u32>,
    pub matrix: Option<Flag>,
    pub arveson: Option<Flag>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(claim: &str, passed: bool, detail: String) -> ClaimCheck {
    ClaimCheck {
        claim: claim.into(),
        passed,
        detail,
    }
}

pub fn verify_certificate(cert: &Certificate) -> Result<VerificationReport> {
    match cert {
        Certificate::Parametric(c) => verify_parametric(c),
        Certificate::Radical(c) => verify_radical(c),
    }
}

/// Floating point at `α`, with `α` refined to 2⁻⁶⁰.
pub fn parametric_point_f64(cert: &ParamCertificate) -> Result<SymTuple> {
    let alpha = AlgebraicNumber::from_record(&cert.alpha)?;
    Ok(cert.y.eval_f64(alpha.to_f64()))
}

fn verify_parametric(cert: &ParamCertificate) -> Result<VerificationReport> {
    let mut alpha = AlgebraicNumber::from_record(&cert.alpha)?;
    let chi = char_poly_param(&cert.a, &cert.y)?;
    let size = chi.size;
    let mut signs = Vec::with_capacity(size + 1);
    for k in 0..=size {
        signs.push(alpha.sign_of(&chi.coeff(k))?);
    }
    let kernel_dim = signs.iter().position(|&s| s != 0).unwrap_or(size);
    let mut checks = vec![check(
        "kernel_dim",
        kernel_dim == cert.claims.kernel_dim,
        format!(
            "χ_α(t) = t^{kernel_dim}·q(t) with q(0) of sign {}; claimed {}",
            signs.get(kernel_dim).copied().unwrap_or(0),
            cert.claims.kernel_dim
        ),
    )];

    // q is real-rooted, so all its roots are positive iff its coefficients
    // alternate strictly starting from q(0) > 0.
    let violation = signs[kernel_dim..]
        .iter()
        .enumerate()
        .find(|&(j, &s)| s != if j % 2 == 0 { 1 } else { -1 });
    let in_da = violation.is_none();
    checks.push(check(
        "in_da",
        in_da == cert.claims.in_da,
        match violation {
            None => "nonzero eigenvalues all positive (coefficients of χ/t^k alternate)".into(),
            Some((j, s)) => format!("coefficient of t^{} has sign {s}, breaking alternation", j + kernel_dim),
        },
    ));

    let a_f = cert.a.to_f64();
    let y_f = cert.y.eval_f64(alpha.to_f64());
    let (g, d, n) = (a_f.g(), a_f.n(), y_f.n());
    let counts = rank_nullity_counts(g, d, n);
    let by_count = kernel_dim < counts.arveson;
    let arveson_numeric = if by_count {
        None
    } else {
        Some(classify(&a_f, &y_f, &ToleranceConfig::default())?.arveson)
    };
    let not_arveson = by_count || arveson_numeric == Some(Flag::No);
    checks.push(check(
        "not_arveson",
        not_arveson == cert.claims.not_arveson,
        if by_count {
            format!("k = {kernel_dim} < Arveson count {}", counts.arveson)
        } else {
            format!("numeric Arveson flag {arveson_numeric:?}")
        },
    ));

    let (sigma_min, sigma_max) = numeric_matrix_system(&a_f, &y_f, kernel_dim)?;
    if let Some(claim) = &cert.claims.matrix_extreme_numeric {
        let ok = sigma_min > 0.0
            && (sigma_min - claim.sigma_min).abs() <= claim.sigma_min_tol
            && sigma_max < claim.sigma_max_below;
        checks.push(check(
            "matrix_extreme_numeric",
            ok,
            format!(
                "σ_min = {sigma_min:.7} (claimed {} ± {:e}), σ_max = {sigma_max:.4} (bound {})",
                claim.sigma_min, claim.sigma_min_tol, claim.sigma_max_below
            ),
        ));
    }
    Ok(VerificationReport {
        checks,
        kernel_dim,
        sigma_min: Some(sigma_min),
        sigma_max: Some(sigma_max),
        precision_digits: None,
        matrix: None,
        arveson: arveson_numeric,
    })
}

/// Extreme singular values of the matrix extreme equations, with the
/// kernel taken as the `k` lowest eigenvectors of the pencil.
pub fn numeric_matrix_system(a: &SymTuple, y: &SymTuple, k: usize) -> Result<(f64, f64)> {
    let l = eval_pencil(a, y)?;
    let (_, vectors) = sym_eigen(l.matrix());
    let kernel = vectors.columns(0, k).into_owned();
    let system = matrix_extreme_system(a, y, &kernel)?;
    let sv = singular_values(&system.data);
    Ok((
        sv.last().copied().unwrap_or(0.0),
        sv.first().copied().unwrap_or(0.0),
    ))
}

fn surd_from_terms(field: &Arc<QuadField>, terms: &[SurdTerm]) -> Result<Surd> {
    terms.iter().try_fold(Surd::zero(field), |acc, t| {
        Ok(acc.add(&Surd::root_term(field, parse_rational(&t.coeff)?, t.radicand)?))
    })
}

fn surd_to_terms(s: &Surd) -> Vec<SurdTerm> {
    let gens = s.field().generators();
    s.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(mask, c)| SurdTerm {
            radicand: gens
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .product(),
            coeff: format_rational(c),
        })
        .collect()
}

/// Exact point of a radical certificate.
pub fn radical_point(cert: &RadicalCertificate) -> Result<(Arc<QuadField>, Vec<Vec<Vec<Surd>>>)> {
    let field = QuadField::new(cert.generators.clone())?;
    let x = cert
        .x
        .iter()
        .map(|m| {
            m.iter()
                .map(|row| row.iter().map(|t| surd_from_terms(&field, t)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((field, x))
}

/// Floating pencil and point of a radical certificate.
pub fn radical_f64(cert: &RadicalCertificate) -> Result<(SymTuple, SymTuple)> {
    let a = SymTuple::new(
        cert.a_diagonals
            .iter()
            .map(|diag| {
                let v = diag
                    .iter()
                    .map(|s| parse_rational(s).map(|q| super::matrix::rat_to_f64(&q)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v)))
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    let (_, x) = radical_point(cert)?;
    let x = SymTuple::new(
        x.iter()
            .map(|m| DMatrix::from_fn(m.len(), m.len(), |r, c| m[r][c].to_f64()))
            .collect(),
    )?;
    Ok((a, x))
}

fn verify_radical(cert: &RadicalCertificate) -> Result<VerificationReport> {
    let (field, x) = radical_point(cert)?;
    let diags = cert
        .a_diagonals
        .iter()
        .map(|d| d.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    if diags.len() != x.len() {
        return Err(Error::Dimension("pencil and point differ in g".into()));
    }
    let d = diags.first().map_or(0, Vec::len);
    let n = x.first().map_or(0, Vec::len);
    let mut kernel_dim = 0;
    let mut bits_used = DEFAULT_BITS;
    let mut violation = None;
    for block in 0..d {
        // I + Σ aᵢ[block]·Xᵢ
        let mut b: Vec<Vec<Surd>> = (0..n)
            .map(|r| (0..n).map(|c| Surd::int(&field, i64::from(r == c))).collect())
            .collect();
        for (diag, xi) in diags.iter().zip(&x) {
            let coef = &diag[block];
            if coef.is_zero() {
                continue;
            }
            for r in 0..n {
                for c in 0..n {
                    b[r][c] = b[r][c].add(&xi[r][c].scale(coef));
                }
            }
        }
        let (psd, rank, bits) = psd_rank(&b)?;
        bits_used = bits_used.max(bits);
        kernel_dim += n - rank;
        if !psd && violation.is_none() {
            violation = Some(block);
        }
    }
    let digits = (f64::from(bits_used) * std::f64::consts::LOG10_2).floor() as u32;
    let mut checks = vec![
        check(
            "in_da",
            violation.is_none() == cert.claims.in_da,
            match violation {
                None => format!("all {d} blocks PSD; enclosures of {digits} digits"),
                Some(b) => format!("block {b} has a negative principal minor"),
            },
        ),
        check(
            "kernel_dim",
            kernel_dim == cert.claims.kernel_dim,
            format!("exact kernel dimension {kernel_dim}; claimed {}", cert.claims.kernel_dim),
        ),
    ];
    let (a_f, x_f) = radical_f64(cert)?;
    let report = classify(&a_f, &x_f, &ToleranceConfig::default())?;
    checks.push(check(
        "matrix",
        (report.matrix == Flag::Yes) == cert.claims.matrix,
        format!("numeric matrix flag {:?}", report.matrix),
    ));
    checks.push(check(
        "not_arveson",
        (report.arveson == Flag::No) == cert.claims.not_arveson,
        format!("numeric Arveson flag {:?}", report.arveson),
    ));
    Ok(VerificationReport {
        checks,
        kernel_dim,
        sigma_min: None,
        sigma_max: None,
        precision_digits: Some(digits),
        matrix: Some(report.matrix),
        arveson: Some(report.arveson),
    })
}

/// PSD test and rank of a small symmetric matrix over the field, from the
/// signs of its leading principal minors after symmetric pivoting.
fn psd_rank(b: &[Vec<Surd>]) -> Result<(bool, usize, u32)> {
    let mut m: Vec<Vec<Surd>> = b.to_vec();
    let size = m.len();
    let mut bits = DEFAULT_BITS;
    let mut rank = 0;
    let mut active: Vec<usize> = (0..size).collect();
    while !active.is_empty() {
        let mut pivot = None;
        for &i in &active {
            let (s, used) = m[i][i].sign(DEFAULT_BITS)?;
            bits = bits.max(used);
            if s < 0 {
                return Ok((false, rank, bits));
            }
            if s > 0 && pivot.is_none() {
                pivot = Some(i);
            }
        }
        let Some(p) = pivot else {
            // Zero diagonal: PSD forces the remaining block to vanish.
            let zero = active.iter().all(|&i| active.iter().all(|&j| m[i][j].is_zero()));
            return Ok((zero, rank, bits));
        };
        rank += 1;
        active.retain(|&i| i != p);
        let inv = m[p][p].inverse()?;
        for &i in &active {
            let f = m[i][p].mul(&inv);
            for &j in &active {
                let sub = f.mul(&m[p][j]);
                m[i][j] = m[i][j].sub(&sub);
            }
        }
    }
    Ok((true, rank, bits))
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn rat_rows(rows: &[&[Rational]]) -> RatMatrix {
    RatMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).expect("rectangular")
}

/// The degree-8 polynomial whose smallest positive root is the dilation
/// parameter of the g=3 example.
pub fn g3_alpha_polynomial() -> QPoly {
    QPoly::new(
        [
            "20828330523",
            "0",
            "-3649588559100",
            "0",
            "132250437590000",
            "0",
            "-651404153000000",
            "0",
            "748026200000000",
        ]
        .iter()
        .map(|s| parse_rational(s).expect("integer literal"))
        .collect(),
    )
}

/// The g=3, d=4 pencil of the exact example.
pub fn g3_pencil() -> RationalTuple {
    RationalTuple::from_ints(
        4,
        &[
            &[0, 0, -1, 1, 0, 0, 1, 0, -1, 1, 0, 1, 1, 0, 1, 1],
            &[-1, -1, 1, 1, -1, 0, 0, 1, 1, 0, -1, -1, 1, 1, -1, 0],
            &[-1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1],
        ],
    )
    .expect("symmetric literal")
}

/// Certificate for the g=3 non-free matrix extreme point at level 3.
pub fn g3_certificate() -> Result<Certificate> {
    let x = RationalTuple::new(vec![
        rat_rows(&[&[q(1, 4), q(27, 100)], &[q(27, 100), q(-13, 100)]]),
        rat_rows(&[&[q(-27, 100), q(21, 100)], &[q(21, 100), q(7, 100)]]),
        rat_rows(&[&[q(7, 50), q(-49, 100)], &[q(-49, 100), q(3, 10)]]),
    ])?;
    let beta = vec![vec![q(1, 1), q(1, 1)], vec![q(3, 1), q(1, 1)], vec![q(3, 1), q(0, 1)]];
    let y = ParamTuple::one_step_dilation(&x, &beta)?;
    let alpha = AlgebraicNumber::new(&g3_alpha_polynomial(), Rational::zero(), q(1, 8))?;
    Ok(Certificate::Parametric(ParamCertificate {
        a: g3_pencil(),
        y,
        alpha: alpha.to_record(),
        claims: Claims {
            in_da: true,
            kernel_dim: 2,
            not_arveson: true,
            matrix_extreme_numeric: Some(NumericClaim {
                sigma_min: 0.0318244,
                sigma_min_tol: 1e-4,
                sigma_max_below: 5.0,
            }),
        },
    }))
}

/// Certificate for the g=4 diagonal example at level 2.
pub fn g4_certificate() -> Result<Certificate> {
    let field = QuadField::new(vec![3, 5, 182])?;
    let r = |c: Rational| Surd::rational(&field, c);
    let root = |c: Rational, m: u64| Surd::root_term(&field, c, m);
    let zero = Surd::zero(&field);

    let x1 = vec![vec![r(q(-1, 2)), zero.clone()], vec![zero.clone(), r(q(3, 10))]];
    // √(3/5)/4 = √15/20
    let off2 = root(q(1, 20), 15)?;
    let x2 = vec![vec![r(q(1, 2)), off2.clone()], vec![off2, r(q(-1, 5))]];
    let num = root(q(1521520, 1), 3)?.sub(&root(q(619599, 1), 182)?);
    let den = root(q(1019200, 1), 3)?.sub(&root(q(1197204, 1), 182)?);
    let x3 = vec![vec![num.div(&den)?, zero.clone()], vec![zero.clone(), r(q(-1, 4))]];
    let top = root(q(5 * 1664, 1), 546)?.sub(&r(q(5 * 124455, 1))).scale(&q(1, 3143688));
    let off4 = root(q(1820, 1), 15)?.add(&root(q(669, 1), 910)?).scale(&q(-4, 392961));
    let bottom = root(q(11200, 1), 546)?.sub(&r(q(429603, 1))).scale(&q(1, 3143688));
    let x4 = vec![vec![top, off4.clone()], vec![off4, bottom]];

    let to_terms = |m: Vec<Vec<Surd>>| -> Vec<Vec<Vec<SurdTerm>>> {
        m.iter().map(|row| row.iter().map(surd_to_terms).collect()).collect()
    };
    let diag = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
    let z = Rational::zero;
    Ok(Certificate::Radical(RadicalCertificate {
        generators: vec![3, 5, 182],
        a_diagonals: vec![
            diag(&[q(2, 1), z(), q(-4, 1), z(), z(), z(), q(-4, 1), z(), q(8, 3)]),
            diag(&[z(), q(4, 1), q(-4, 1), z(), z(), z(), z(), q(-8, 3), q(8, 3)]),
            diag(&[z(), z(), z(), q(4, 1), z(), q(-8, 3), q(-4, 1), z(), q(8, 3)]),
            diag(&[z(), z(), z(), z(), q(8, 3), q(-8, 3), z(), q(-8, 3), q(8, 3)]),
        ],
        x: vec![to_terms(x1), to_terms(x2), to_terms(x3), to_terms(x4)],
        claims: RadicalClaims {
            in_da: true,
            kernel_dim: 7,
            matrix: true,
            not_arveson: true,
        },
    }))
}

//! Random search for exact points with a two-dimensional kernel: solve
//! `L_A(X)K = 0`, `Λ_A(βᵀ)K = 0` exactly for a random sign vector `K`,
//! then dilate `X` by `αβ` with `α` the smallest positive root of
//! `dχ/dt(0)`.

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::algebraic::AlgebraicNumber;
use super::certificate::{numeric_matrix_system, verify_certificate, Certificate, Claims, NumericClaim, ParamCertificate};
use super::charpoly::char_poly_param;
use super::matrix::{rational_nullspace, rational_solve, ParamTuple, RatMatrix, RationalTuple, Solutions};
use super::poly::Rational;
use crate::error::{Error, Result};
use crate::extreme::{rank_nullity_counts, svec_len, svec_pairs};
use crate::linalg::min_eigenvalue;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Number of sign vectors `K` to try.
    pub budget: usize,
    /// Draws from an affine solution family before giving up on a `K`.
    pub psd_draws: usize,
    /// Draw coefficients are integers in `[−spread, spread]` over `denominator`.
    pub spread: i64,
    pub denominator: i64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: 100,
            psd_draws: 200,
            spread: 100,
            denominator: 100,
        }
    }
}

/// Why a sign vector was discarded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub tried: usize,
    pub no_solution: usize,
    pub no_direction: usize,
    pub not_psd: usize,
    pub no_root: usize,
    pub second_derivative_zero: usize,
    pub rejected_on_verify: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub certificate: Option<Certificate>,
    pub stats: SearchStats,
}

/// Searches for a level-`n` point `Y` of `D_A` with `dim ker L_A(Y) = 2`,
/// dilating a level `n−1` boundary point by one row and column.
pub fn exact_search<R: Rng + ?Sized>(
    a: &RationalTuple,
    n: usize,
    rng: &mut R,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    if n < 2 {
        return Err(Error::Invalid("target level must be at least 2".into()));
    }
    let level = n - 1;
    let mut stats = SearchStats::default();
    for _ in 0..opts.budget {
        stats.tried += 1;
        let k = random_sign_vector(a.n() * level, rng);
        let directions = rational_nullspace(&beta_system(a, level, &k));
        if directions.is_empty() {
            stats.no_direction += 1;
            continue;
        }
        let beta_flat = random_combination(&directions, 2, 1, rng);
        let beta: Vec<Vec<Rational>> = beta_flat.chunks(level).map(<[Rational]>::to_vec).collect();

        let (m, rhs) = point_system(a, level, &k);
        let x = match rational_solve(&m, &rhs)? {
            Solutions::None => {
                stats.no_solution += 1;
                continue;
            }
            Solutions::Unique(v) => Some(v).filter(|v| psd_point(a, level, v)),
            Solutions::Affine {
                particular,
                directions,
            } => (0..opts.psd_draws).find_map(|_| {
                let shift = random_combination(&directions, opts.spread, opts.denominator, rng);
                let v: Vec<Rational> = particular.iter().zip(&shift).map(|(p, s)| p + s).collect();
                psd_point(a, level, &v).then_some(v)
            }),
        };
        let Some(x) = x else {
            stats.not_psd += 1;
            continue;
        };
        let x = unpack(a.g(), level, &x)?;
        let y = ParamTuple::one_step_dilation(&x, &beta)?;
        let chi = char_poly_param(a, &y)?;
        let p1 = chi.p1();
        let Some(alpha) = AlgebraicNumber::smallest_positive_root(&p1)? else {
            stats.no_root += 1;
            continue;
        };
        if alpha.is_root_of(&chi.p2()) {
            stats.second_derivative_zero += 1;
            continue;
        }
        let a_f = a.to_f64();
        let y_f = y.eval_f64(alpha.to_f64());
        let (sigma_min, sigma_max) = numeric_matrix_system(&a_f, &y_f, 2)?;
        let counts = rank_nullity_counts(a.g(), a.n(), n);
        let cert = Certificate::Parametric(ParamCertificate {
            a: a.clone(),
            y,
            alpha: alpha.to_record(),
            claims: Claims {
                in_da: true,
                kernel_dim: 2,
                not_arveson: 2 < counts.arveson,
                matrix_extreme_numeric: Some(NumericClaim {
                    sigma_min,
                    sigma_min_tol: 1e-8 + 1e-6 * sigma_min,
                    sigma_max_below: sigma_max * (1.0 + 1e-6) + 1e-12,
                }),
            },
        });
        if !verify_certificate(&cert)?.passed() {
            stats.rejected_on_verify += 1;
            continue;
        }
        return Ok(SearchOutcome {
            certificate: Some(cert),
            stats,
        });
    }
    Ok(SearchOutcome {
        certificate: None,
        stats,
    })
}

fn random_sign_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<i64> {
    loop {
        let k: Vec<i64> = (0..len).map(|_| rng.random_range(-1..=1)).collect();
        if k.iter().any(|&v| v != 0) {
            return k;
        }
    }
}

/// Nonzero combination with integer weights in `[−spread, spread]/den`.
fn random_combination<R: Rng + ?Sized>(basis: &[Vec<Rational>], spread: i64, den: i64, rng: &mut R) -> Vec<Rational> {
    let len = basis[0].len();
    loop {
        let w: Vec<i64> = basis.iter().map(|_| rng.random_range(-spread..=spread)).collect();
        if w.iter().all(|&v| v == 0) {
            continue;
        }
        let mut out = vec![Rational::zero(); len];
        for (b, &wi) in basis.iter().zip(&w) {
            if wi == 0 {
                continue;
            }
            let c = Rational::new(wi.into(), den.into());
            for (o, v) in out.iter_mut().zip(b) {
                *o += &c * v;
            }
        }
        return out;
    }
}

/// `Λ_A(βᵀ)K = 0` in the unknowns `βᵢ[y]`, column `i·n + y`.
fn beta_system(a: &RationalTuple, n: usize, k: &[i64]) -> RatMatrix {
    let (g, d) = (a.g(), a.n());
    let mut m = RatMatrix::zeros(d, g * n);
    for (i, ai) in a.mats().iter().enumerate() {
        for row in 0..d {
            for b in 0..d {
                let coef = &ai[(row, b)];
                if coef.is_zero() {
                    continue;
                }
                for y in 0..n {
                    let kv = k[b * n + y];
                    if kv != 0 {
                        m[(row, i * n + y)] += coef * Rational::from_integer(kv.into());
                    }
                }
            }
        }
    }
    m
}

/// `L_A(X)K = 0` as `M·svec(X) = −K`.
fn point_system(a: &RationalTuple, n: usize, k: &[i64]) -> (RatMatrix, Vec<Rational>) {
    let (g, d) = (a.g(), a.n());
    let s = svec_len(n);
    let mut m = RatMatrix::zeros(d * n, g * s);
    for (i, ai) in a.mats().iter().enumerate() {
        for (idx, (p, q)) in svec_pairs(n).into_iter().enumerate() {
            let col = i * s + idx;
            for row_a in 0..d {
                for b in 0..d {
                    let coef = &ai[(row_a, b)];
                    if coef.is_zero() {
                        continue;
                    }
                    // (Eₚq + E_qp) contributes K[b·n+q] to row p and K[b·n+p] to row q.
                    let mut add = |x: usize, y: usize| {
                        let kv = k[b * n + y];
                        if kv != 0 {
                            m[(row_a * n + x, col)] += coef * Rational::from_integer(kv.into());
                        }
                    };
                    add(p, q);
                    if p != q {
                        add(q, p);
                    }
                }
            }
        }
    }
    let rhs = k.iter().map(|&v| Rational::from_integer((-v).into())).collect();
    (m, rhs)
}

fn unpack(g: usize, n: usize, v: &[Rational]) -> Result<RationalTuple> {
    let s = svec_len(n);
    let mats = (0..g)
        .map(|i| {
            let mut m = RatMatrix::zeros(n, n);
            for (idx, (p, q)) in svec_pairs(n).into_iter().enumerate() {
                m[(p, q)] = v[i * s + idx].clone();
                m[(q, p)] = v[i * s + idx].clone();
            }
            m
        })
        .collect();
    RationalTuple::new(mats)
}

fn psd_point(a: &RationalTuple, n: usize, v: &[Rational]) -> bool {
    let Ok(x) = unpack(a.g(), n, v) else {
        return false;
    };
    let Ok(l) = a.pencil(&x) else {
        return false;
    };
    let lf: DMatrix<f64> = l.to_f64();
    min_eigenvalue(&lf) >= -1e-12 * lf.norm().max(1.0)
}

//! Random defining tuples and interior points.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::extreme::is_irreducible;
use crate::kernel::ToleranceConfig;
use crate::opt::lmi_feasible;
use crate::projective::{degenerate_classify, Degeneracy};
use crate::sym::{eval_linear, SymTuple};

pub const MAX_REJECTIONS: usize = 1000;
const INTERIOR_MARGIN: f64 = 1e-6;

fn normal_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    (&m + m.transpose()) * 0.5
}

/// `g` iid standard normal symmetric `n × n` matrices.
pub fn random_tuple<R: Rng + ?Sized>(g: usize, n: usize, rng: &mut R) -> Result<SymTuple> {
    if g == 0 || n == 0 {
        return Err(Error::Invalid("tuple needs g ≥ 1 and n ≥ 1".into()));
    }
    SymTuple::new((0..g).map(|_| normal_symmetric(n, rng)).collect())
}

/// True iff `{x ∈ ℝᵍ : Λ_A(x) ⪰ 0} = {0}`. Each coordinate sign is pinned
/// to ±1 with the others in `[−1, 1]`; the cone is nontrivial iff one of
/// these slices is feasible.
pub fn boundedness_check(a: &SymTuple) -> Result<bool> {
    let g = a.g();
    let bounds = vec![(-1.0, 1.0); g - 1];
    for i in 0..g {
        let rest: Vec<DMatrix<f64>> = (0..g).filter(|&j| j != i).map(|j| a.mat(j).clone()).collect();
        for sign in [1.0, -1.0] {
            if lmi_feasible(&(a.mat(i) * sign), &rest, Some(&bounds))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Irreducible bounded `g`-tuple of `d × d` matrices, by rejection.
pub fn random_defining_tuple<R: Rng + ?Sized>(g: usize, d: usize, rng: &mut R) -> Result<SymTuple> {
    let tol = ToleranceConfig::default().irreducible;
    for _ in 0..MAX_REJECTIONS {
        let a = random_tuple(g, d, rng)?;
        if degenerate_classify(&a)? != Degeneracy::Nondegenerate {
            continue;
        }
        if is_irreducible(&a, tol)? && boundedness_check(&a)? {
            return Ok(a);
        }
    }
    Err(Error::Config(format!(
        "no bounded irreducible tuple with g = {g}, d = {d} after {MAX_REJECTIONS} draws"
    )))
}

/// Random direction scaled to half its exit distance from `D_A`.
pub fn random_interior_point<R: Rng + ?Sized>(a: &SymTuple, n: usize, rng: &mut R) -> Result<SymTuple> {
    for _ in 0..MAX_REJECTIONS {
        let dir = random_tuple(a.g(), n, rng)?;
        // sup{t : I + tΛ_A(X) ⪰ 0} = −1/λ_min(Λ_A(X)).
        let lam = eval_linear(a, &dir)?.min_eigenvalue();
        if lam >= 0.0 {
            return Err(Error::Unbounded(dir.mats().iter().map(|m| m[(0, 0)]).collect()));
        }
        let x = dir.scale(-0.5 / lam);
        if crate::sym::eval_pencil(a, &x)?.min_eigenvalue() >= INTERIOR_MARGIN {
            return Ok(x);
        }
    }
    Err(Error::Internal("interior point stayed within the margin of the boundary".into()))
}

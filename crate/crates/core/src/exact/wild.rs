//! Boundary points of the wild disc `{(X, Y) : I − X² − Y² ⪰ 0}`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, psd_sqrt, sym_eigen};
use crate::sym::SymTuple;

const MAX_DRAWS: usize = 100;
/// Residuals below this are treated as indefinite and resampled.
const RESIDUAL_FLOOR: f64 = -1e-12;

/// `A₁ = E₁₂ + E₂₁`, `A₂ = E₁₃ + E₃₁`, so that `L_A(X, Y) ⪰ 0` iff
/// `X² + Y² ⪯ I`.
pub fn wild_disc_pencil() -> SymTuple {
    let mut a1 = DMatrix::zeros(3, 3);
    a1[(0, 1)] = 1.0;
    a1[(1, 0)] = 1.0;
    let mut a2 = DMatrix::zeros(3, 3);
    a2[(0, 2)] = 1.0;
    a2[(2, 0)] = 1.0;
    SymTuple::new(vec![a1, a2]).expect("symmetric")
}

#[derive(Debug, Clone)]
pub struct WildCandidate {
    pub point: SymTuple,
    /// `I − X² − Y²`.
    pub residual: DMatrix<f64>,
    pub residual_rank: usize,
}

impl WildCandidate {
    /// Expected kernel dimension of the pencil at the point.
    pub fn expected_kernel_dim(&self) -> usize {
        self.residual.nrows() - self.residual_rank
    }
}

/// Random `(X, Y)` at level `n` whose residual `I − X² − Y²` is a random
/// PSD matrix of rank `n − 3`.
pub fn wild_disc_candidate<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<WildCandidate> {
    if n < 4 {
        return Err(Error::Invalid("wild disc candidates need n ≥ 4".into()));
    }
    let rank = n - 3;
    for _ in 0..MAX_DRAWS {
        let q = random_orthogonal(n, rng);
        let mut diag = DMatrix::zeros(n, n);
        for i in 0..rank {
            diag[(i, i)] = rng.random_range(0.05..0.9);
        }
        let s = &q * diag * q.transpose();
        let room = DMatrix::identity(n, n) - &s;

        let x0 = random_symmetric(n, rng);
        // Largest t with t²X₀² ⪯ I − S.
        let (vals, vecs) = sym_eigen(&room);
        let inv_half = &vecs
            * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, vals.iter().map(|v| v.sqrt().recip())))
            * vecs.transpose();
        let scaled = &inv_half * (&x0 * &x0) * &inv_half;
        let top = sym_eigen(&scaled).0.last().copied().unwrap_or(0.0);
        if top <= 0.0 {
            continue;
        }
        let x = x0 * (rng.random_range(0.2..0.9) / top.sqrt());
        let y_sq = &room - &x * &x;
        if min_eigenvalue(&y_sq) < RESIDUAL_FLOOR {
            continue;
        }
        let y = psd_sqrt(&y_sq);
        let y = (&y + y.transpose()) * 0.5;
        let residual = DMatrix::identity(n, n) - &x * &x - &y * &y;
        let point = SymTuple::new(vec![x, y])?;
        return Ok(WildCandidate {
            point,
            residual,
            residual_rank: rank,
        });
    }
    Err(Error::Internal("wild disc residual stayed indefinite".into()))
}

fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    (&m + m.transpose()) * 0.5
}

fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    m.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{lmi_kernel, ToleranceConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn candidate_has_three_dimensional_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = wild_disc_candidate(&mut rng, 8).unwrap();
        assert_eq!(c.expected_kernel_dim(), 3);
        let ker = lmi_kernel(&wild_disc_pencil(), &c.point, ToleranceConfig::default().lmi_post)
            .unwrap()
            .expect("kernel found");
        assert_eq!(ker.k, 3);
        let (vals, _) = sym_eigen(&c.residual);
        assert!(vals[0].abs() < 1e-10 && vals[3] > 1e-3, "{vals:?}");
    }
}

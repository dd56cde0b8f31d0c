//! Shared inputs for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectrex_core::lab::{random_defining_tuple, random_interior_point};
use spectrex_core::SymTuple;

/// Seeded bounded pencil and interior point.
pub fn instance(g: usize, d: usize, n: usize, seed: u64) -> (SymTuple, SymTuple) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_defining_tuple(g, d, &mut rng).expect("bounded tuple");
    let x = random_interior_point(&a, n, &mut rng).expect("interior point");
    (a, x)
}

//! Seeded inputs for the kernel benchmarks.

use embedlab::numkit::expm;
use embedlab::RealMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense intensity matrix with off-diagonal rates in `[0, scale)`.
pub fn intensity(n: usize, scale: f64, seed: u64) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        let mut total = 0.0;
        for (j, x) in row.iter_mut().enumerate() {
            if i != j {
                *x = scale * rng.random::<f64>();
                total += *x;
            }
        }
        row[i] = -total;
    }
    RealMatrix::from_rows(&rows).expect("finite square rows")
}

/// `exp(R)` for a seeded intensity matrix `R`: an embeddable stochastic matrix.
pub fn embeddable(n: usize, seed: u64) -> RealMatrix {
    expm(&intensity(n, 1.0, seed)).expect("small generator")
}

/// Block upper-triangular nonnegative matrix with `blocks` irreducible
/// diagonal blocks of size `size`, states shuffled.
pub fn reducible(blocks: usize, size: usize, seed: u64) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = blocks * size;
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i / size == j / size || (j / size > i / size && rng.random_bool(0.6)) {
                *x = rng.random::<f64>();
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    RealMatrix::from_rows(&rows).expect("finite square rows").permuted(&perm)
}

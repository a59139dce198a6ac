//! Seeded random matrix families shared by the integration tests.
#![allow(dead_code)]

use embedlab::numkit::expm;
use embedlab::RealMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Off-diagonal rates uniform in `[0, scale)`, each zero with probability
/// `sparsity`; diagonal makes rows sum to zero.
pub fn intensity(rng: &mut ChaCha8Rng, n: usize, scale: f64, sparsity: f64) -> RealMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        let mut total = 0.0;
        for (j, x) in row.iter_mut().enumerate() {
            if i != j && !rng.random_bool(sparsity) {
                *x = scale * rng.random::<f64>();
                total += *x;
            }
        }
        row[i] = -total;
    }
    RealMatrix::from_rows(&rows).unwrap()
}

/// Intensity matrix with every off-diagonal rate in `[low, high)`.
pub fn dense_intensity(rng: &mut ChaCha8Rng, n: usize, low: f64, high: f64) -> RealMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        let mut total = 0.0;
        for (j, x) in row.iter_mut().enumerate() {
            if i != j {
                *x = rng.random_range(low..high);
                total += *x;
            }
        }
        row[i] = -total;
    }
    RealMatrix::from_rows(&rows).unwrap()
}

/// Z-matrix with off-diagonals in `(-1, 0]` (zero with probability
/// `sparsity`) and diagonal in `[diag_low, diag_high)`.
pub fn z_matrix(
    rng: &mut ChaCha8Rng,
    n: usize,
    sparsity: f64,
    diag_low: f64,
    diag_high: f64,
) -> RealMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i == j {
                *x = rng.random_range(diag_low..diag_high);
            } else if !rng.random_bool(sparsity) {
                *x = -rng.random::<f64>();
            }
        }
    }
    RealMatrix::from_rows(&rows).unwrap()
}

/// Nonsingular M-matrix `s I - K` with `K >= 0` and `s > rho(K)`.
pub fn m_matrix(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> RealMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    let mut max_row = 0.0f64;
    for (i, row) in rows.iter_mut().enumerate() {
        let mut total = 0.0;
        for (j, x) in row.iter_mut().enumerate() {
            if i != j && !rng.random_bool(sparsity) {
                *x = -rng.random::<f64>();
                total -= *x;
            }
        }
        max_row = max_row.max(total);
    }
    let s = max_row + rng.random_range(0.1..1.0);
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = s;
    }
    RealMatrix::from_rows(&rows).unwrap()
}

pub fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Strictly positive diagonal scaling composed with a permutation.
pub fn monomial(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
    let perm = permutation(rng, n);
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[perm[i]] = rng.random_range(0.5..2.0);
    }
    RealMatrix::from_rows(&rows).unwrap()
}

pub fn exp(a: &RealMatrix) -> RealMatrix {
    expm(a).unwrap()
}

pub fn dim(rng: &mut ChaCha8Rng, low: usize, high: usize) -> usize {
    rng.random_range(low..=high)
}

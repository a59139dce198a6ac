use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eigen::{eigenvalues, min_gap};
use super::matrix::RealMatrix;
use super::tolerance::ToleranceConfig;
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 64;
const SEED: u64 = 0x5eed_d157_1ac7;

/// Fraction of the permitted perturbation budget actually spent.
const BUDGET_FRACTION: f64 = 0.4;

/// Separates repeated eigenvalues by a small perturbation inside the
/// nonzero pattern of `a`.
///
/// The result satisfies `||a' - a||_F <= perturb_scale * (1 + ||a||_F)`, has
/// the exact zero pattern of `a`, and has pairwise eigenvalue gaps of at
/// least `distinct_tol`. For stochastic inputs every row with two or more
/// nonzeros keeps its row sum; the compensating entry is the diagonal if
/// nonzero, otherwise the largest entry. A row whose only nonzero is a
/// single entry cannot be perturbed without changing its sum, so such rows
/// are scaled and stochasticity is lost there.
///
/// Sampling is seeded, so the same input always yields the same output.
pub fn perturb_distinct(a: &RealMatrix, cfg: &ToleranceConfig) -> Result<RealMatrix> {
    if min_gap(&eigenvalues(a)) >= cfg.distinct_tol {
        return Ok(a.clone());
    }
    let n = a.dim();
    let m = a.as_matrix();
    let budget = cfg.perturb_scale * (1.0 + a.frobenius_norm());
    let stochastic = is_stochastic(a, cfg);

    let pattern: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| m[(i, j)].abs() > cfg.entry_tol).collect())
        .collect();

    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED.wrapping_add(attempt as u64));
        let mut d = DMatrix::<f64>::zeros(n, n);
        for (i, cols) in pattern.iter().enumerate() {
            if cols.is_empty() {
                continue;
            }
            if stochastic && cols.len() >= 2 {
                let pivot = if cols.contains(&i) {
                    i
                } else {
                    *cols
                        .iter()
                        .max_by(|x, y| m[(i, **x)].total_cmp(&m[(i, **y)]))
                        .unwrap()
                };
                let mut total = 0.0;
                for &j in cols.iter().filter(|&&j| j != pivot) {
                    let delta = m[(i, j)] * rng.random_range(-1.0..1.0);
                    d[(i, j)] = delta;
                    total += delta;
                }
                d[(i, pivot)] = -total;
            } else {
                for &j in cols {
                    d[(i, j)] = m[(i, j)] * rng.random_range(-1.0..1.0);
                }
            }
        }
        let size = d.norm();
        if size == 0.0 {
            continue;
        }
        let factor = (BUDGET_FRACTION * budget / size).min(0.5);
        let candidate = m + d * factor;
        let keeps_pattern = (0..n).all(|i| {
            (0..n).all(|j| {
                let before = m[(i, j)];
                let after = candidate[(i, j)];
                if before.abs() > cfg.entry_tol {
                    after.abs() > cfg.entry_tol && after.signum() == before.signum()
                } else {
                    after == before
                }
            })
        });
        if !keeps_pattern {
            continue;
        }
        let candidate = RealMatrix::new(candidate)?;
        if min_gap(&eigenvalues(&candidate)) >= cfg.distinct_tol {
            return Ok(candidate);
        }
    }
    Err(Error::PerturbationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

fn is_stochastic(a: &RealMatrix, cfg: &ToleranceConfig) -> bool {
    let tol = cfg.row_sum_tol(a.dim());
    a.as_matrix().iter().all(|x| *x >= -cfg.entry_tol)
        && a.row_sums().iter().all(|s| (s - 1.0).abs() <= tol)
}

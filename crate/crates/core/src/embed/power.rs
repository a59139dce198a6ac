use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{expm, primary_root, RealMatrix, ToleranceConfig};

/// `P = K^m` with `K` an inverse M-matrix, written as
/// `(1 - eps)^m (I - eps H)^-m` when `P` is stochastic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PowerForm {
    Stochastic { epsilon: f64, h: RealMatrix },
    General { k: RealMatrix },
}

/// Primary `m`th root of `P^-1` tested for the M-matrix property.
///
/// Returns `None` when the root is not an M-matrix (so `P` is not the
/// `m`th power of an inverse M-matrix along the primary branch). For a
/// stochastic `P` with `W = sI - K`, `eps = (s - 1) / s` and
/// `H = K / (s - 1)`; at `s = 1` the form degenerates to `eps = 0`, `H = I`.
pub fn inverse_m_power_form(p: &RealMatrix, m: u32, cfg: &ToleranceConfig) -> Result<Option<PowerForm>> {
    let n = p.dim();
    let tol = cfg.entry_tol;
    for i in 0..n {
        for j in 0..n {
            if p[(i, j)] < -tol {
                return Err(Error::NotNonnegative {
                    row: i,
                    col: j,
                    value: p[(i, j)],
                });
            }
        }
    }
    let inv = p.inverse()?;
    let w = primary_root(&inv, m)?;
    let slack = tol * (1.0 + w.max_abs());
    let z_pattern = (0..n).all(|i| (0..n).all(|j| i == j || w[(i, j)] <= slack));
    if !z_pattern {
        return Ok(None);
    }
    let k_root = w.inverse()?;
    if k_root.as_matrix().min() < -tol * (1.0 + k_root.max_abs()) {
        return Ok(None);
    }

    let row_tol = cfg.row_sum_tol(n);
    let stochastic = p.row_sums().iter().all(|s| (s - 1.0).abs() <= row_tol);
    if !stochastic {
        return Ok(Some(PowerForm::General { k: k_root }));
    }

    let s = w.diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if s - 1.0 <= tol {
        return Ok(Some(PowerForm::Stochastic {
            epsilon: 0.0,
            h: RealMatrix::identity(n),
        }));
    }
    let mut h = w.as_matrix().clone();
    for i in 0..n {
        for j in 0..n {
            let kij = if i == j { s - w[(i, j)] } else { -w[(i, j)] };
            h[(i, j)] = kij.max(0.0) / (s - 1.0);
        }
    }
    let h = RealMatrix::new(h)?;
    if h.row_sums().iter().any(|r| (r - 1.0).abs() > row_tol.max(slack)) {
        return Ok(None);
    }
    let epsilon = (s - 1.0) / s;
    let rebuilt = power_form_matrix(epsilon, &h, m)?;
    if rebuilt.relative_distance(p) > cfg.recon_tol {
        return Ok(None);
    }
    Ok(Some(PowerForm::Stochastic { epsilon, h }))
}

/// `(1 - eps)^m (I - eps H)^-m`.
pub fn power_form_matrix(epsilon: f64, h: &RealMatrix, m: u32) -> Result<RealMatrix> {
    let n = h.dim();
    let base = RealMatrix::new(RealMatrix::identity(n).as_matrix() - h.as_matrix() * epsilon)?;
    base.inverse()?.pow(m)?.scale((1.0 - epsilon).powi(m as i32))
}

/// Default ceiling for the root order searched by [`im_root_approx`].
pub const IM_ROOT_CEILING: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImRoot {
    pub n: u64,
    /// `exp(-G / n)`, the primary `n`th root of `P^-1`; an M-matrix.
    pub inverse_root: RealMatrix,
    /// `exp(G / n)`, the primary `n`th root of `P`; an inverse M-matrix.
    pub root: RealMatrix,
}

/// Smallest `n >= n_start` found for which `P^{-1/n} = exp(-G / n)` is an
/// M-matrix, for a generator `G` with strictly positive off-diagonals.
///
/// `n` is doubled until the test passes and then bisected back down, so
/// the result is minimal whenever the property is monotone in `n`.
pub fn im_root_approx(
    p: &RealMatrix,
    generator: &RealMatrix,
    n_start: u64,
    cfg: &ToleranceConfig,
) -> Result<ImRoot> {
    im_root_approx_with_ceiling(p, generator, n_start, IM_ROOT_CEILING, cfg)
}

pub fn im_root_approx_with_ceiling(
    p: &RealMatrix,
    generator: &RealMatrix,
    n_start: u64,
    ceiling: u64,
    cfg: &ToleranceConfig,
) -> Result<ImRoot> {
    let dim = p.dim();
    if generator.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: generator.dim(),
        });
    }
    for i in 0..dim {
        for j in 0..dim {
            if i != j && generator[(i, j)] <= cfg.entry_tol {
                return Err(Error::OffDiagonalZeros {
                    row: i,
                    col: j,
                    value: generator[(i, j)],
                });
            }
        }
    }
    let residual = expm(generator)?.relative_distance(p);
    if !(residual <= cfg.recon_tol) {
        return Err(Error::NotAValidPair { residual });
    }

    let test = |n: u64| -> Result<Option<RealMatrix>> {
        let w = expm(&generator.scale(-1.0 / n as f64)?)?;
        let slack = cfg.entry_tol * (1.0 + w.max_abs());
        let z = (0..dim).all(|i| (0..dim).all(|j| i == j || w[(i, j)] <= slack));
        Ok(z.then_some(w))
    };

    let mut lo = n_start.max(1);
    let mut found = None;
    let mut n = lo;
    while n <= ceiling {
        if let Some(w) = test(n)? {
            found = Some((n, w));
            break;
        }
        lo = n + 1;
        n = n.saturating_mul(2);
    }
    let (mut hi, mut w) = found.ok_or(Error::RootSearchExhausted { ceiling })?;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match test(mid)? {
            Some(m) => {
                hi = mid;
                w = m;
            }
            None => lo = mid + 1,
        }
    }
    let root = expm(&generator.scale(1.0 / hi as f64)?)?;
    Ok(ImRoot {
        n: hi,
        inverse_root: w,
        root,
    })
}

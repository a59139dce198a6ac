//! Eigendecomposition of real matrices with a canonical eigenvalue order.
//!
//! Eigenvalues come from the real Schur form and are forced into exact
//! conjugate pairs. Eigenvectors are null vectors of `A - lambda I` taken
//! from an SVD; the partner of a complex eigenvector is its conjugate, so
//! any function applied consistently across a pair assembles to a real
//! matrix up to roundoff.

use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use super::matrix::{complex_norm_one, RealMatrix};
use super::tolerance::ToleranceConfig;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

#[derive(Clone, Debug, Serialize)]
pub struct Eigendecomposition {
    eigenvalues: Vec<C64>,
    #[serde(skip)]
    vectors: DMatrix<C64>,
    #[serde(skip)]
    inverse: DMatrix<C64>,
    min_pairwise_gap: f64,
    basis_condition: f64,
    residual: f64,
    source_norm: f64,
    distinct_tol: f64,
}

impl Eigendecomposition {
    /// Eigenvalues in canonical order: descending modulus, then descending
    /// real part, then ascending imaginary part.
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn inverse_basis(&self) -> &DMatrix<C64> {
        &self.inverse
    }

    pub fn min_pairwise_gap(&self) -> f64 {
        self.min_pairwise_gap
    }

    pub fn basis_condition(&self) -> f64 {
        self.basis_condition
    }

    /// Relative residual `||A - V diag(lambda) V^-1||_F / ||A||_F`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub(crate) fn source_norm(&self) -> f64 {
        self.source_norm
    }

    pub(crate) fn distinct_tol(&self) -> f64 {
        self.distinct_tol
    }

    /// Index of the conjugate partner of eigenvalue `j`, if it is non-real.
    pub fn conjugate_partner(&self, j: usize) -> Option<usize> {
        partner_index(&self.eigenvalues, j)
    }

    /// `V diag(f(lambda_j)) V^-1`.
    pub fn assemble(&self, values: &[C64]) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (j, v) in values.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= v;
            }
        }
        scaled * &self.inverse
    }
}

/// Eigenvalues of `a` in canonical order with exact conjugate pairing.
pub fn eigenvalues(a: &RealMatrix) -> Vec<C64> {
    let raw: Vec<C64> = a.as_matrix().complex_eigenvalues().iter().copied().collect();
    let mut paired = pair_conjugates(raw);
    paired.sort_by(canonical_order);
    paired
}

pub fn spectral_radius(a: &RealMatrix) -> f64 {
    eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Minimum distance between any two entries, `+inf` for fewer than two.
pub fn min_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

/// Eigendecomposition with a distinct-eigenvalue, well-conditioned basis.
///
/// Returns [`Error::IllConditioned`] carrying the eigenvalues when they are
/// repeated (gap below `distinct_tol`), when the basis condition exceeds
/// `cond_ceiling`, or when the reconstruction residual exceeds `recon_tol`.
pub fn eig(a: &RealMatrix, cfg: &ToleranceConfig) -> Result<Eigendecomposition> {
    let n = a.dim();
    let m = a.as_matrix();
    let values = eigenvalues(a);
    let gap = min_gap(&values);
    let source_norm = a.frobenius_norm();

    if gap < cfg.distinct_tol {
        return Err(Error::IllConditioned {
            eigenvalues: values,
            min_gap: gap,
            condition: f64::INFINITY,
            residual: f64::NAN,
        });
    }

    let mut vectors = DMatrix::<C64>::zeros(n, n);
    let mut j = 0;
    while j < n {
        let lambda = values[j];
        if lambda.im == 0.0 {
            let v = real_null_vector(m, lambda.re);
            for i in 0..n {
                vectors[(i, j)] = Complex::new(v[i], 0.0);
            }
            j += 1;
        } else {
            // canonical order places the negative-imaginary member first
            let v = complex_null_vector(m, lambda);
            for i in 0..n {
                vectors[(i, j)] = v[i];
                vectors[(i, j + 1)] = v[i].conj();
            }
            j += 2;
        }
    }

    let inverse = match vectors.clone().try_inverse() {
        Some(inv) => inv,
        None => {
            return Err(Error::IllConditioned {
                eigenvalues: values,
                min_gap: gap,
                condition: f64::INFINITY,
                residual: f64::NAN,
            })
        }
    };
    let condition = complex_norm_one(&vectors) * complex_norm_one(&inverse);

    let mut decomposition = Eigendecomposition {
        eigenvalues: values,
        vectors,
        inverse,
        min_pairwise_gap: gap,
        basis_condition: condition.max(1.0),
        residual: 0.0,
        source_norm,
        distinct_tol: cfg.distinct_tol,
    };
    let rebuilt = decomposition.assemble(&decomposition.eigenvalues.clone());
    let diff = DMatrix::from_fn(n, n, |i, k| rebuilt[(i, k)] - Complex::new(m[(i, k)], 0.0));
    let residual = diff.norm() / source_norm.max(f64::MIN_POSITIVE);
    decomposition.residual = residual;

    if !condition.is_finite() || condition > cfg.cond_ceiling || residual > cfg.recon_tol {
        return Err(Error::IllConditioned {
            eigenvalues: decomposition.eigenvalues,
            min_gap: gap,
            condition,
            residual,
        });
    }
    Ok(decomposition)
}

/// Clusters eigenvalues closer than `tol` (transitively) and returns the
/// cluster means.
pub(crate) fn cluster_eigenvalues(values: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut clusters: Vec<(usize, C64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match clusters.iter_mut().find(|c| c.0 == r) {
            Some(c) => {
                c.1 += values[i];
                c.2 += 1;
            }
            None => clusters.push((r, values[i], 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(_, sum, count)| (sum / count as f64, count))
        .collect()
}

/// Number of singular values of `A - lambda I` below `tol`.
pub(crate) fn geometric_multiplicity(a: &RealMatrix, lambda: C64, tol: f64) -> usize {
    let n = a.dim();
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { lambda } else { Complex::new(0.0, 0.0) };
        Complex::new(a[(i, j)], 0.0) - d
    });
    shifted
        .singular_values()
        .iter()
        .filter(|s| **s <= tol)
        .count()
}

fn canonical_order(a: &C64, b: &C64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(a.im.total_cmp(&b.im))
}

fn pair_conjugates(raw: Vec<C64>) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(raw.len());
    let mut upper: Vec<C64> = Vec::new();
    let mut lower: Vec<C64> = Vec::new();
    for z in raw {
        match z.im.partial_cmp(&0.0) {
            Some(Ordering::Greater) => upper.push(z),
            Some(Ordering::Less) => lower.push(z),
            _ => out.push(Complex::new(z.re, 0.0)),
        }
    }
    let mut used = vec![false; lower.len()];
    for p in upper {
        let best = lower
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .min_by(|(_, x), (_, y)| {
                (**x - p.conj())
                    .norm()
                    .total_cmp(&(**y - p.conj()).norm())
            })
            .map(|(k, _)| k);
        match best {
            Some(k) => {
                used[k] = true;
                let q = lower[k];
                let z = Complex::new(0.5 * (p.re + q.re), 0.5 * (p.im - q.im));
                out.push(z);
                out.push(z.conj());
            }
            None => out.push(Complex::new(p.re, 0.0)),
        }
    }
    for (k, q) in lower.into_iter().enumerate() {
        if !used[k] {
            out.push(Complex::new(q.re, 0.0));
        }
    }
    out
}

fn partner_index(values: &[C64], j: usize) -> Option<usize> {
    let z = values[j];
    if z.im == 0.0 {
        return None;
    }
    if z.im < 0.0 {
        (j + 1 < values.len() && values[j + 1] == z.conj()).then_some(j + 1)
    } else {
        (j >= 1 && values[j - 1] == z.conj()).then_some(j - 1)
    }
}

fn real_null_vector(a: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let n = a.nrows();
    let shifted = a - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let k = argmin(svd.singular_values.as_slice());
    let mut v: DVector<f64> = vt.row(k).transpose();
    let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead < 0.0 {
        v.neg_mut();
    }
    let norm = v.norm();
    v / norm
}

fn complex_null_vector(a: &DMatrix<f64>, lambda: C64) -> DVector<C64> {
    let n = a.nrows();
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { lambda } else { Complex::new(0.0, 0.0) };
        Complex::new(a[(i, j)], 0.0) - d
    });
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let k = argmin(svd.singular_values.as_slice());
    let v: DVector<C64> = vt.row(k).adjoint();
    let lead = v
        .iter()
        .copied()
        .fold(Complex::new(0.0, 0.0), |m: C64, z| if z.norm() > m.norm() { z } else { m });
    let phase = if lead.norm() > 0.0 { lead.conj() / lead.norm() } else { Complex::new(1.0, 0.0) };
    let v = v * phase;
    let norm = v.norm();
    v / Complex::new(norm, 0.0)
}

fn argmin(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

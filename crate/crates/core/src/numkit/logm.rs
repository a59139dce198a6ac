//! Matrix logarithms and primary roots.
//!
//! Two routes: [`logm_branch`] assembles any branch from an
//! eigendecomposition (distinct eigenvalues only), while [`logm_principal`]
//! computes the real principal logarithm by inverse scaling and squaring and
//! works for defective matrices too.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::eigen::{
    cluster_eigenvalues, eigenvalues, geometric_multiplicity, Eigendecomposition, C64,
};
use super::expm::expm_dense;
use super::matrix::{norm_one, ComplexMatrix, RealMatrix};
use super::tolerance::ToleranceConfig;
use crate::error::{Error, Result};

/// One integer branch offset per eigenvalue, in canonical eigenvalue order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchSelection {
    pub offsets: Vec<i64>,
}

impl BranchSelection {
    pub fn principal(n: usize) -> Self {
        BranchSelection { offsets: vec![0; n] }
    }

    pub fn is_principal(&self) -> bool {
        self.offsets.iter().all(|k| *k == 0)
    }
}

/// `V diag(Log lambda_j + 2 pi i k_j) V^-1`.
pub fn logm_branch(e: &Eigendecomposition, sel: &BranchSelection) -> Result<ComplexMatrix> {
    if sel.offsets.len() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: sel.offsets.len(),
        });
    }
    if e.min_pairwise_gap() < e.distinct_tol() {
        return Err(Error::RepeatedEigenvalues);
    }
    let floor = singular_floor(e.dim(), e.source_norm());
    let mut logs = Vec::with_capacity(e.dim());
    for (lambda, k) in e.eigenvalues().iter().zip(&sel.offsets) {
        if lambda.norm() <= floor {
            return Err(Error::SingularMatrix);
        }
        logs.push(branch_log(*lambda, *k));
    }
    Ok(ComplexMatrix::from_inner(e.assemble(&logs)))
}

/// `Log lambda + 2 pi i k`.
pub fn branch_log(lambda: C64, k: i64) -> C64 {
    let principal = lambda.ln();
    Complex::new(principal.re, principal.im + 2.0 * PI * k as f64)
}

/// Real principal logarithm by inverse scaling and squaring.
pub fn logm_principal(a: &RealMatrix) -> Result<RealMatrix> {
    check_principal_domain(a)?;
    let n = a.dim();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut x = a.as_matrix().clone();
    let mut squarings = 0;
    while norm_one(&(&x - &eye)) > 0.25 {
        if squarings >= 64 {
            return Err(Error::Overflow);
        }
        x = sqrtm_db(&x)?;
        squarings += 1;
    }
    let log = log_near_identity(&x)?;
    RealMatrix::checked(log * 2f64.powi(squarings))
}

/// Principal `n`th root, `exp(log(A) / n)`.
pub fn primary_root(a: &RealMatrix, n: u32) -> Result<RealMatrix> {
    if n == 0 {
        return Err(Error::OutOfRange { index: 0, limit: 1 });
    }
    if n == 1 {
        check_principal_domain(a)?;
        return Ok(a.clone());
    }
    let log = logm_principal(a)?;
    RealMatrix::checked(expm_dense(&(log.as_matrix() / n as f64))?)
}

/// Culver's criterion: a real matrix has exactly one real logarithm when all
/// its eigenvalues are positive reals and each occurs in a single Jordan block.
pub fn has_unique_real_log(a: &RealMatrix, cfg: &ToleranceConfig) -> bool {
    let values = eigenvalues(a);
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let cluster_tol = cfg.distinct_tol * scale;
    let rank_tol = 1e-8 * a.frobenius_norm().max(1.0);
    cluster_eigenvalues(&values, cluster_tol)
        .into_iter()
        .all(|(center, _)| {
            center.im.abs() <= cluster_tol
                && center.re > cluster_tol
                && geometric_multiplicity(a, Complex::new(center.re, 0.0), rank_tol) <= 1
        })
}

fn singular_floor(n: usize, norm: f64) -> f64 {
    n as f64 * f64::EPSILON * norm.max(f64::MIN_POSITIVE)
}

fn check_principal_domain(a: &RealMatrix) -> Result<()> {
    let floor = singular_floor(a.dim(), a.frobenius_norm());
    for z in eigenvalues(a) {
        if z.norm() <= floor {
            return Err(Error::SingularMatrix);
        }
        if z.im == 0.0 && z.re < 0.0 {
            return Err(Error::NegativeRealEigenvalue(z.re));
        }
    }
    Ok(())
}

/// Principal square root by the scaled product Denman-Beavers iteration.
fn sqrtm_db(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut m = a.clone();
    let mut y = a.clone();
    for _ in 0..100 {
        let m_inv = m.clone().try_inverse().ok_or(Error::SingularMatrix)?;
        let det = m.clone().lu().determinant().abs();
        let mu = if det > 0.0 && det.is_finite() {
            det.powf(-1.0 / (2.0 * n as f64))
        } else {
            1.0
        };
        let mu2 = mu * mu;
        y = &y * (&eye + &m_inv / mu2) * (0.5 * mu);
        m = (&eye + (&m * mu2 + &m_inv / mu2) * 0.5) * 0.5;
        if !y.iter().all(|x| x.is_finite()) {
            return Err(Error::Overflow);
        }
        if norm_one(&(&m - &eye)) <= 1e-15 * n as f64 {
            return Ok(y);
        }
    }
    Ok(y)
}

/// `log X = 2 atanh((X - I)(X + I)^-1)` for `X` close to the identity.
fn log_near_identity(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let denom = (x + &eye).try_inverse().ok_or(Error::SingularMatrix)?;
    let c = (x - &eye) * denom;
    let c2 = &c * &c;
    let mut term = c.clone();
    let mut sum = c;
    for k in 1..80 {
        term = &term * &c2;
        let add = &term / (2 * k + 1) as f64;
        let size = norm_one(&add);
        sum += add;
        if size <= 1e-18 * norm_one(&sum).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(sum * 2.0)
}

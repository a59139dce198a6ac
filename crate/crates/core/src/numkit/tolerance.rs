use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical slack used by every predicate and verdict in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Entrywise slack for sign and zero decisions.
    pub entry_tol: f64,
    /// Relative reconstruction tolerance (Frobenius).
    pub recon_tol: f64,
    /// Eigenvalues closer than this count as repeated.
    pub distinct_tol: f64,
    /// Relative size of perturbations applied to separate eigenvalues.
    pub perturb_scale: f64,
    /// Eigenvector bases with a 1-norm condition number above this are rejected.
    pub cond_ceiling: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            entry_tol: 1e-9,
            recon_tol: 1e-8,
            distinct_tol: 1e-7,
            perturb_scale: 1e-6,
            cond_ceiling: 1e12,
        }
    }
}

impl ToleranceConfig {
    pub fn with_entry_tol(mut self, entry_tol: f64) -> Self {
        self.entry_tol = entry_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.entry_tol) {
            return Err(Error::InvalidTolerance("entry_tol must be positive"));
        }
        if !positive(self.recon_tol) {
            return Err(Error::InvalidTolerance("recon_tol must be positive"));
        }
        if !positive(self.distinct_tol) {
            return Err(Error::InvalidTolerance("distinct_tol must be positive"));
        }
        if !positive(self.perturb_scale) {
            return Err(Error::InvalidTolerance("perturb_scale must be positive"));
        }
        if !(self.cond_ceiling >= 1.0) {
            return Err(Error::InvalidTolerance("cond_ceiling must be at least 1"));
        }
        Ok(())
    }

    /// Row-sum slack for an `n`-state matrix.
    pub fn row_sum_tol(&self, n: usize) -> f64 {
        n as f64 * self.entry_tol
    }
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{Eigendecomposition, C64};

/// Which window the imaginary parts `Arg lambda_j + 2 pi k` must fall in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// `|Im| <= -log det`, valid for every intensity matrix.
    #[default]
    IsraelTwoSided,
    /// `log det <= Im <= 0`.
    PaperOneSided,
    /// Z-matrix logarithms of nonnegative matrices, via the Perron
    /// eigenvalue of the unknown `Q`.
    Theorem4General,
}

impl BoundMode {
    pub fn name(self) -> &'static str {
        match self {
            BoundMode::IsraelTwoSided => "israel_two_sided",
            BoundMode::PaperOneSided => "paper_one_sided",
            BoundMode::Theorem4General => "theorem4_general",
        }
    }
}

/// Admissible branch offsets for every eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchBound {
    pub mode: BoundMode,
    pub im_low: f64,
    pub im_high: f64,
    /// Admissible offsets per eigenvalue, sorted by `(|k|, k)`.
    pub offsets: Vec<Vec<i64>>,
    pub per_eigenvalue_counts: Vec<u64>,
    /// Saturating product of `per_eigenvalue_counts`.
    pub raw_tuple_count: u64,
    pub perron_index: Option<usize>,
    /// `-ln rho(B)`, the eigenvalue of `Q` that carries a nonnegative
    /// eigenvector; only for [`BoundMode::Theorem4General`].
    pub lambda_tilde: Option<f64>,
}

impl BranchBound {
    /// Keeps only the offsets accepted by `keep(position, k)`. Returns the
    /// first position left without any offset, if one exists.
    pub fn restrict(&mut self, mut keep: impl FnMut(usize, i64) -> bool) -> Option<usize> {
        let mut emptied = None;
        for (j, offs) in self.offsets.iter_mut().enumerate() {
            offs.retain(|&k| keep(j, k));
            if offs.is_empty() && emptied.is_none() {
                emptied = Some(j);
            }
        }
        self.recount();
        emptied
    }

    fn recount(&mut self) {
        self.per_eigenvalue_counts = self.offsets.iter().map(|o| o.len() as u64).collect();
        self.raw_tuple_count = self
            .per_eigenvalue_counts
            .iter()
            .fold(1u64, |acc, &c| acc.saturating_mul(c));
    }
}

/// Offsets `k` with `Arg lambda_j + 2 pi k` inside the window selected by
/// `mode`. The Perron eigenvalue (the leading eigenvalue when it is real and
/// positive) is pinned to `k = 0`.
pub fn branch_bound(e: &Eigendecomposition, det: f64, mode: BoundMode) -> Result<BranchBound> {
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularDeterminant);
    }
    let n = e.dim();
    let log_det = det.abs().ln();
    let values = e.eigenvalues();
    let perron_index = values
        .first()
        .filter(|z| z.im == 0.0 && z.re > 0.0)
        .map(|_| 0);

    let (im_low, im_high, lambda_tilde) = match mode {
        BoundMode::IsraelTwoSided => {
            let w = (-log_det).max(0.0);
            (-w, w, None)
        }
        BoundMode::PaperOneSided => (log_det.min(0.0), 0.0, None),
        BoundMode::Theorem4General => {
            let rho = values.first().map(|z| z.norm()).unwrap_or(1.0);
            let lt = -rho.ln();
            let w = theorem4_width(n, lt, log_det);
            (-w, w, Some(lt))
        }
    };

    let offsets: Vec<Vec<i64>> = values
        .iter()
        .enumerate()
        .map(|(j, z)| {
            if Some(j) == perron_index {
                vec![0]
            } else {
                offsets_in_window(z.arg(), im_low, im_high)
            }
        })
        .collect();
    let mut bound = BranchBound {
        mode,
        im_low,
        im_high,
        offsets,
        per_eigenvalue_counts: Vec::new(),
        raw_tuple_count: 0,
        perron_index,
        lambda_tilde,
    };
    bound.recount();
    Ok(bound)
}

/// `|lambda~ (n - 1) - log det|`, widened where that expression is too
/// small to hold.
///
/// With `Q = theta I - N`, every eigenvalue `mu` of `Q` has
/// `|Im mu| <= cot(pi / n) (Re mu - lambda~)` because the spectrum of
/// `N / rho(N)` lies in the Karpelevich region, whose boundary next to 1 is
/// the segment to `exp(2 pi i / n)`. Summing `Re mu - lambda~` over the
/// spectrum gives `-log det - n lambda~`, and a non-real `mu` appears there
/// twice, which yields the second term.
pub fn theorem4_width(n: usize, lambda_tilde: f64, log_det: f64) -> f64 {
    let stated = (lambda_tilde * (n as f64 - 1.0) - log_det).abs();
    if n < 3 {
        return stated;
    }
    let spread = (-log_det - n as f64 * lambda_tilde).max(0.0);
    let cot = 1.0 / (PI / n as f64).tan();
    stated.max(0.5 * cot * spread)
}

/// Integers `k` with `low <= theta + 2 pi k <= high`, sorted by `(|k|, k)`.
pub(crate) fn offsets_in_window(theta: f64, low: f64, high: f64) -> Vec<i64> {
    let slack = 1e-12 * (1.0 + low.abs().max(high.abs()));
    let two_pi = 2.0 * PI;
    let first = ((low - slack - theta) / two_pi).ceil() as i64;
    let last = ((high + slack - theta) / two_pi).floor() as i64;
    let mut ks: Vec<i64> = (first..=last).collect();
    ks.sort_by_key(|&k| (k.abs(), k));
    ks
}

/// Whether `mu` lies in the closed cone of possible intensity-matrix
/// eigenvalues for `n` states: `|Im mu| <= cot(pi / n) (-Re mu)`.
pub fn in_runnenberg_cone(mu: C64, n: usize) -> bool {
    let slack = 1e-9 * (1.0 + mu.norm());
    if mu.norm() <= slack || n < 2 {
        return true;
    }
    if mu.re > slack {
        return false;
    }
    let cot = 1.0 / (PI / n as f64).tan();
    mu.im.abs() <= cot * (-mu.re) + slack
}

use serde::{Deserialize, Serialize};

use super::bound::BranchBound;
use crate::error::{Error, Result};
use crate::numkit::{logm_branch, BranchSelection, Eigendecomposition, RealMatrix, ToleranceConfig};

/// A real logarithm candidate together with the branch that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub selection: BranchSelection,
    pub log: RealMatrix,
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    /// Real eigenvalue, or first member of a conjugate pair.
    Free,
    /// Second member of a pair; mirrors the negated offset of its partner.
    Mirror(usize),
}

/// Lazily assembles every real logarithm admitted by a [`BranchBound`].
///
/// A real logarithm needs `k = 0` on real eigenvalues and opposite offsets
/// on conjugate partners, so only those tuples are assembled; tuples are
/// visited in lexicographic order of the per-eigenvalue offset lists, which
/// start with `0`, so the principal branch comes first when admissible.
pub struct GeneratorStream<'a> {
    e: &'a Eigendecomposition,
    entry_tol: f64,
    slots: Vec<Slot>,
    choices: Vec<Vec<i64>>,
    cursor: Vec<usize>,
    done: bool,
    blocked: Option<usize>,
    candidate_count: u64,
    assembled: u64,
    discarded_unreal: u64,
}

impl GeneratorStream<'_> {
    /// Number of conjugate-consistent tuples the stream will assemble.
    pub fn candidate_count(&self) -> u64 {
        self.candidate_count
    }

    /// An eigenvalue position with no usable offset, which makes every real
    /// logarithm inadmissible.
    pub fn blocked_position(&self) -> Option<usize> {
        self.blocked
    }

    pub fn assembled(&self) -> u64 {
        self.assembled
    }

    /// Tuples whose assembled logarithm failed the reality test.
    pub fn discarded_unreal(&self) -> u64 {
        self.discarded_unreal
    }

    fn selection(&self) -> BranchSelection {
        let mut offsets = vec![0; self.slots.len()];
        for (j, slot) in self.slots.iter().enumerate() {
            offsets[j] = match *slot {
                Slot::Free => self.choices[j][self.cursor[j]],
                Slot::Mirror(p) => -self.choices[p][self.cursor[p]],
            };
        }
        BranchSelection { offsets }
    }

    fn advance(&mut self) {
        for j in (0..self.slots.len()).rev() {
            if let Slot::Mirror(_) = self.slots[j] {
                continue;
            }
            self.cursor[j] += 1;
            if self.cursor[j] < self.choices[j].len() {
                return;
            }
            self.cursor[j] = 0;
        }
        self.done = true;
    }
}

impl Iterator for GeneratorStream<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        while !self.done {
            let selection = self.selection();
            self.advance();
            self.assembled += 1;
            let log = logm_branch(self.e, &selection)
                .ok()
                .and_then(|c| c.to_real(self.entry_tol));
            match log {
                Some(log) => return Some(Candidate { selection, log }),
                None => self.discarded_unreal += 1,
            }
        }
        None
    }
}

/// Stream of real logarithms of the matrix behind `e` within `bound`.
pub fn enumerate_generators<'a>(
    e: &'a Eigendecomposition,
    bound: &BranchBound,
    cfg: &ToleranceConfig,
) -> Result<GeneratorStream<'a>> {
    let n = e.dim();
    if bound.offsets.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bound.offsets.len(),
        });
    }
    if e.min_pairwise_gap() < cfg.distinct_tol {
        return Err(Error::RepeatedEigenvalues);
    }
    let values = e.eigenvalues();
    let mut slots = Vec::with_capacity(n);
    let mut choices = vec![Vec::new(); n];
    let mut blocked = None;
    for j in 0..n {
        match e.conjugate_partner(j) {
            None => {
                slots.push(Slot::Free);
                // the log of a negative real eigenvalue is never real
                if values[j].re > 0.0 && bound.offsets[j].contains(&0) {
                    choices[j] = vec![0];
                }
            }
            Some(p) if p > j => {
                slots.push(Slot::Free);
                choices[j] = bound.offsets[j]
                    .iter()
                    .copied()
                    .filter(|k| bound.offsets[p].contains(&-k))
                    .collect();
            }
            Some(p) => slots.push(Slot::Mirror(p)),
        }
        if matches!(slots[j], Slot::Free) && choices[j].is_empty() && blocked.is_none() {
            blocked = Some(j);
        }
    }
    let candidate_count = if blocked.is_some() {
        0
    } else {
        slots
            .iter()
            .zip(&choices)
            .filter(|(s, _)| matches!(s, Slot::Free))
            .fold(1u64, |acc, (_, c)| acc.saturating_mul(c.len() as u64))
    };
    Ok(GeneratorStream {
        e,
        entry_tol: cfg.entry_tol,
        cursor: vec![0; n],
        done: blocked.is_some() || n == 0,
        slots,
        choices,
        blocked,
        candidate_count,
        assembled: 0,
        discarded_unreal: 0,
    })
}

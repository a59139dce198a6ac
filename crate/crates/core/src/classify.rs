//! Tolerance-aware membership tests for the matrix classes used throughout
//! the crate.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{eigenvalues, spectral_radius, RealMatrix, ToleranceConfig};
use crate::structure::strongly_connected;

/// Matrices whose 1-norm condition number exceeds this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassFlag {
    Nonnegative,
    StrictlyPositive,
    PositiveDiagonal,
    Stochastic,
    ZMatrix,
    IntensityMatrix,
    MMatrix,
    InverseMMatrix,
    Irreducible,
    Nonsingular,
}

/// Evidence attached to a flag: the violating location for a false flag,
/// or a certifying object where one exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Entry { row: usize, col: usize, value: f64 },
    RowSum { row: usize, sum: f64 },
    InverseEntry { row: usize, col: usize, value: f64 },
    Requires { flag: ClassFlag },
    Singular { condition: f64 },
    Unreachable { from: usize, to: usize },
    Inverse { matrix: RealMatrix },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub nonnegative: bool,
    pub strictly_positive: bool,
    pub positive_diagonal: bool,
    pub stochastic: bool,
    pub z_matrix: bool,
    pub intensity_matrix: bool,
    pub m_matrix: bool,
    pub inverse_m_matrix: bool,
    pub irreducible: bool,
    pub nonsingular: bool,
}

impl ClassFlags {
    pub fn get(&self, flag: ClassFlag) -> bool {
        match flag {
            ClassFlag::Nonnegative => self.nonnegative,
            ClassFlag::StrictlyPositive => self.strictly_positive,
            ClassFlag::PositiveDiagonal => self.positive_diagonal,
            ClassFlag::Stochastic => self.stochastic,
            ClassFlag::ZMatrix => self.z_matrix,
            ClassFlag::IntensityMatrix => self.intensity_matrix,
            ClassFlag::MMatrix => self.m_matrix,
            ClassFlag::InverseMMatrix => self.inverse_m_matrix,
            ClassFlag::Irreducible => self.irreducible,
            ClassFlag::Nonsingular => self.nonsingular,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub flags: ClassFlags,
    pub witnesses: BTreeMap<ClassFlag, Witness>,
    pub det: f64,
    pub spectral_radius: f64,
}

pub fn classify_matrix(a: &RealMatrix, cfg: &ToleranceConfig) -> ClassReport {
    let n = a.dim();
    let tol = cfg.entry_tol;
    let row_tol = cfg.row_sum_tol(n);
    let mut witnesses = BTreeMap::new();
    let mut flags = ClassFlags::default();

    let entries = || (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    let off_diagonal = || entries().filter(|(i, j)| i != j);
    let entry = |(i, j): (usize, usize)| Witness::Entry {
        row: i,
        col: j,
        value: a[(i, j)],
    };

    flags.nonnegative = check(&mut witnesses, 
        ClassFlag::Nonnegative,
        entries().find(|&ij| a[ij] < -tol).map(entry),
    );
    flags.strictly_positive = check(&mut witnesses, 
        ClassFlag::StrictlyPositive,
        entries().find(|&ij| a[ij] <= tol).map(entry),
    );
    flags.positive_diagonal = check(&mut witnesses, 
        ClassFlag::PositiveDiagonal,
        (0..n).map(|i| (i, i)).find(|&ij| a[ij] <= tol).map(entry),
    );
    let sums = a.row_sums();
    let unit_rows = sums
        .iter()
        .enumerate()
        .find(|(_, s)| (**s - 1.0).abs() > row_tol)
        .map(|(i, s)| Witness::RowSum { row: i, sum: *s });
    flags.stochastic = if !flags.nonnegative {
        check(&mut witnesses, 
            ClassFlag::Stochastic,
            Some(Witness::Requires {
                flag: ClassFlag::Nonnegative,
            }),
        )
    } else {
        check(&mut witnesses, ClassFlag::Stochastic, unit_rows)
    };
    flags.z_matrix = check(&mut witnesses, 
        ClassFlag::ZMatrix,
        off_diagonal().find(|&ij| a[ij] > tol).map(entry),
    );
    let zero_rows = sums
        .iter()
        .enumerate()
        .find(|(_, s)| s.abs() > row_tol)
        .map(|(i, s)| Witness::RowSum { row: i, sum: *s });
    flags.intensity_matrix = check(&mut witnesses, 
        ClassFlag::IntensityMatrix,
        off_diagonal().find(|&ij| a[ij] < -tol).map(entry).or(zero_rows),
    );

    let det = a.determinant();
    let inverse = checked_inverse(a);
    flags.nonsingular = match &inverse {
        Ok(_) => true,
        Err(cond) => check(&mut witnesses, 
            ClassFlag::Nonsingular,
            Some(Witness::Singular { condition: *cond }),
        ),
    };

    flags.m_matrix = match (&inverse, flags.z_matrix) {
        (_, false) => check(&mut witnesses, 
            ClassFlag::MMatrix,
            Some(Witness::Requires {
                flag: ClassFlag::ZMatrix,
            }),
        ),
        (Err(cond), true) => check(&mut witnesses, 
            ClassFlag::MMatrix,
            Some(Witness::Singular { condition: *cond }),
        ),
        (Ok(inv), true) => {
            let slack = tol * (1.0 + inv.max_abs());
            let bad = entries().find(|&ij| inv[ij] < -slack).map(|(i, j)| Witness::InverseEntry {
                row: i,
                col: j,
                value: inv[(i, j)],
            });
            check(&mut witnesses, ClassFlag::MMatrix, bad)
        }
    };

    flags.inverse_m_matrix = match (&inverse, flags.nonnegative) {
        (_, false) => check(&mut witnesses, 
            ClassFlag::InverseMMatrix,
            Some(Witness::Requires {
                flag: ClassFlag::Nonnegative,
            }),
        ),
        (Err(cond), true) => check(&mut witnesses, 
            ClassFlag::InverseMMatrix,
            Some(Witness::Singular { condition: *cond }),
        ),
        (Ok(inv), true) => {
            // A >= 0 is the nonnegative inverse of inv, so inv is an M-matrix
            // exactly when it has the Z-pattern.
            let slack = tol * (1.0 + inv.max_abs());
            let bad = off_diagonal().find(|&ij| inv[ij] > slack).map(|(i, j)| {
                Witness::InverseEntry {
                    row: i,
                    col: j,
                    value: inv[(i, j)],
                }
            });
            match bad {
                Some(w) => check(&mut witnesses, ClassFlag::InverseMMatrix, Some(w)),
                None => {
                    witnesses.insert(
                        ClassFlag::InverseMMatrix,
                        Witness::Inverse {
                            matrix: inv.clone(),
                        },
                    );
                    true
                }
            }
        }
    };

    flags.irreducible = match strongly_connected(a, tol) {
        Ok(()) => true,
        Err((from, to)) => check(&mut witnesses, 
            ClassFlag::Irreducible,
            Some(Witness::Unreachable { from, to }),
        ),
    };

    ClassReport {
        flags,
        witnesses,
        det,
        spectral_radius: spectral_radius(a),
    }
}

fn check(
    witnesses: &mut BTreeMap<ClassFlag, Witness>,
    flag: ClassFlag,
    violation: Option<Witness>,
) -> bool {
    match violation {
        Some(w) => {
            witnesses.insert(flag, w);
            false
        }
        None => true,
    }
}

fn checked_inverse(a: &RealMatrix) -> std::result::Result<RealMatrix, f64> {
    match a.inverse() {
        Ok(inv) => {
            let cond = a.norm_one() * inv.norm_one();
            if cond.is_finite() && cond <= SINGULAR_CONDITION {
                Ok(inv)
            } else {
                Err(cond)
            }
        }
        Err(_) => Err(f64::INFINITY),
    }
}

/// Nonnegative eigenvector of a Z-matrix.
///
/// With `theta = max_i Q_ii + ||Q||_inf + 1`, the matrix `N = theta I - Q`
/// is nonnegative with a positive diagonal. The Perron root `rho` of `N`
/// is taken from the spectrum and the eigenvector is obtained by inverse
/// iteration with the resolvent `((rho + delta) I - N)^-1`, which is itself
/// entrywise nonnegative, so every iterate stays nonnegative. The returned
/// eigenvalue is `theta - rho`, normalised so `||v||_1 = 1`.
pub fn nonneg_eigvec_of_z(q: &RealMatrix, cfg: &ToleranceConfig) -> Result<(Vec<f64>, f64)> {
    let n = q.dim();
    let m = q.as_matrix();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] > cfg.entry_tol {
                return Err(Error::NotZMatrix {
                    row: i,
                    col: j,
                    value: m[(i, j)],
                });
            }
        }
    }
    let max_diag = (0..n).map(|i| m[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let theta = max_diag + q.norm_inf() + 1.0;
    let shifted = DMatrix::identity(n, n) * theta - m;
    let shifted_rm = RealMatrix::new(shifted.clone())?;
    let rho = eigenvalues(&shifted_rm)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);

    let mut v = DVector::from_element(n, 1.0 / n as f64);
    let mut delta = 1e-10 * (1.0 + rho);
    let eye = DMatrix::<f64>::identity(n, n);
    for _ in 0..6 {
        let lu = (&eye * (rho + delta) - &shifted).lu();
        let mut converged = false;
        for _ in 0..200 {
            let Some(next) = lu.solve(&v) else { break };
            let next = next.map(|x| x.max(0.0));
            let next = &next / next.sum();
            let change = (&next - &v).amax();
            v = next;
            if change <= 1e-15 {
                converged = true;
                break;
            }
        }
        if converged && v.iter().all(|x| x.is_finite()) {
            break;
        }
        delta *= 100.0;
    }
    Ok((v.iter().copied().collect(), theta - rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn implications_hold(r: &ClassReport) {
        let f = &r.flags;
        if f.strictly_positive {
            assert!(f.nonnegative);
        }
        if f.m_matrix {
            assert!(f.z_matrix && f.nonsingular);
        }
        if f.inverse_m_matrix {
            assert!(f.nonnegative && f.nonsingular);
        }
        for flag in [
            ClassFlag::Nonnegative,
            ClassFlag::StrictlyPositive,
            ClassFlag::PositiveDiagonal,
            ClassFlag::Stochastic,
            ClassFlag::ZMatrix,
            ClassFlag::IntensityMatrix,
            ClassFlag::MMatrix,
            ClassFlag::InverseMMatrix,
            ClassFlag::Irreducible,
            ClassFlag::Nonsingular,
        ] {
            if !f.get(flag) {
                assert!(r.witnesses.contains_key(&flag), "{flag:?} lacks a witness");
            }
        }
    }

    #[test]
    fn z1_is_intensity() {
        let r = classify_matrix(&fixtures::z1(), &cfg());
        assert!(r.flags.intensity_matrix);
        assert!(!r.flags.z_matrix);
        implications_hold(&r);
    }

    #[test]
    fn e1_and_e2_are_inverse_m() {
        for e in [fixtures::e1(), fixtures::e2(), fixtures::e1_e2()] {
            let r = classify_matrix(&e, &cfg());
            assert!(r.flags.inverse_m_matrix, "{:?}", r.witnesses);
            assert!(matches!(
                r.witnesses[&ClassFlag::InverseMMatrix],
                Witness::Inverse { .. }
            ));
            implications_hold(&r);
        }
        let r = classify_matrix(&fixtures::e2_e1(), &cfg());
        assert!(!r.flags.inverse_m_matrix);
        implications_hold(&r);
    }

    #[test]
    fn identity_flags() {
        let r = classify_matrix(&RealMatrix::identity(3), &cfg());
        let f = &r.flags;
        assert!(f.nonnegative && f.stochastic && f.z_matrix && f.m_matrix && f.inverse_m_matrix);
        assert!(!f.strictly_positive);
        assert!(!f.irreducible);
        assert_eq!(r.det, 1.0);
        implications_hold(&r);
    }

    #[test]
    fn two_state_flags() {
        let p = RealMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8]]).unwrap();
        let r = classify_matrix(&p, &cfg());
        assert!(r.flags.stochastic && r.flags.irreducible && r.flags.strictly_positive);
        assert!((r.spectral_radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_sets_inverse_flags_false() {
        let a = RealMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let r = classify_matrix(&a, &cfg());
        assert!(!r.flags.nonsingular && !r.flags.inverse_m_matrix);
        assert!(matches!(
            r.witnesses[&ClassFlag::InverseMMatrix],
            Witness::Singular { .. }
        ));
        implications_hold(&r);
    }

    #[test]
    fn eigvec_of_diagonal() {
        let q = RealMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let (v, lambda) = nonneg_eigvec_of_z(&q, &cfg()).unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
        assert!((v[0] - 1.0).abs() < 1e-9 && v[1].abs() < 1e-9 && v[2].abs() < 1e-9);
    }

    #[test]
    fn eigvec_of_negated_z1() {
        // Qv = 0 forces v2 = v3 and 2 v1 = v2 + v3, so v is uniform
        let q = fixtures::z1().neg();
        let (v, lambda) = nonneg_eigvec_of_z(&q, &cfg()).unwrap();
        assert!(lambda.abs() < 1e-12);
        for x in v {
            assert!((x - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eigvec_of_symmetric_pair() {
        let q = RealMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let (v, lambda) = nonneg_eigvec_of_z(&q, &cfg()).unwrap();
        assert!(lambda.abs() < 1e-12);
        assert!((v[0] - 0.5).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eigvec_rejects_non_z() {
        let q = RealMatrix::from_rows(&[[1.0, 0.5], [-1.0, 1.0]]).unwrap();
        assert!(matches!(
            nonneg_eigvec_of_z(&q, &cfg()),
            Err(Error::NotZMatrix { row: 0, col: 1, .. })
        ));
    }
}

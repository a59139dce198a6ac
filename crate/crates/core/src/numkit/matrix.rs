use std::fmt;
use std::ops::Index;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense square real matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix(DMatrix<f64>);

impl RealMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(RealMatrix(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.as_ref().len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.as_ref().len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i].as_ref()[j]))
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        RealMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        RealMatrix(DMatrix::zeros(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        RealMatrix(DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 }))
    }

    /// Wraps the result of arithmetic, rejecting overflow.
    pub(crate) fn checked(m: DMatrix<f64>) -> Result<Self> {
        if m.iter().all(|x| x.is_finite()) {
            Ok(RealMatrix(m))
        } else {
            Err(Error::Overflow)
        }
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        RealMatrix(self.0.transpose())
    }

    pub fn matmul(&self, other: &RealMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::checked(&self.0 * &other.0)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        Self::checked(&self.0 * s)
    }

    pub fn neg(&self) -> Self {
        RealMatrix(-&self.0)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            acc = &acc * &self.0;
        }
        Self::checked(acc)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMatrix)
            .and_then(Self::checked)
    }

    pub fn determinant(&self) -> f64 {
        self.0.clone().lu().determinant()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.0)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        norm_one(&self.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// ||self - other||_F / max(||other||_F, tiny).
    pub fn relative_distance(&self, other: &RealMatrix) -> f64 {
        let denom = other.frobenius_norm().max(f64::MIN_POSITIVE);
        (&self.0 - &other.0).norm() / denom
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0.row(i).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    /// Symmetric permutation `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = perm.len();
        RealMatrix(DMatrix::from_fn(n, n, |i, j| self.0[(perm[i], perm[j])]))
    }

    /// Principal submatrix on the given indices.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        self.permuted(idx)
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.0[ij]
    }
}

impl fmt::Display for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            let row: Vec<String> = self.0.row(i).iter().map(|x| format!("{x:>12.6}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for RealMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RealMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        RealMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex<f64>>);

impl ComplexMatrix {
    pub(crate) fn from_inner(m: DMatrix<Complex<f64>>) -> Self {
        ComplexMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex<f64>> {
        &self.0
    }

    pub fn max_imag(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.0.map(|z| z.re)
    }

    /// Maximum absolute row sum of the entry moduli.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Imaginary-part threshold below which this matrix counts as real:
    /// `n * entry_tol * (1 + ||A||_inf)`.
    pub fn reality_threshold(&self, entry_tol: f64) -> f64 {
        self.dim() as f64 * entry_tol * (1.0 + self.norm_inf())
    }

    /// Real part, if every imaginary component is below the reality threshold.
    pub fn to_real(&self, entry_tol: f64) -> Option<RealMatrix> {
        if self.max_imag() <= self.reality_threshold(entry_tol) {
            RealMatrix::new(self.real_part()).ok()
        } else {
            None
        }
    }
}

pub(crate) fn norm_inf(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn norm_one(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn complex_norm_one(m: &DMatrix<Complex<f64>>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

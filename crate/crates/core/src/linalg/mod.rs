//! Dense real-matrix primitives.

mod decomp;
mod lanczos;
mod norms;
pub mod random;
mod subspace;
mod tridiag;

use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;

use crate::{Error, Result};

pub use decomp::{leading_eigs, leading_eigs_operator, leading_eigs_ordered, svd_r, sym_eigen_full, EigenOrdering, SpectralPair};
pub use norms::{frobenius_norm, hollow, one_inf_norm, spectral_norm, two_inf_norm};
pub use subspace::{
    aligned_two_inf_error, check_orthonormal, orthonormality_defect, procrustes_align, sin_theta,
    SinThetaFlavor, ORTHONORMAL_TOL,
};

/// Dense real matrix with finite entries.
///
/// Construction from untrusted data rejects NaN and infinities. Arithmetic
/// performed inside the crate keeps entries finite for finite inputs.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("ragged rows"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), cols, &flat)
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Result<Self> {
        if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
            // nalgebra storage is column-major
            let (row, col) = (pos % m.nrows(), pos / m.nrows());
            return Err(Error::NonFinite { row, col });
        }
        Ok(DenseMatrix(m))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_fn(rows, cols, f))
    }

    /// Wraps a matrix produced by finite arithmetic on finite data.
    pub(crate) fn wrap(m: DMatrix<f64>) -> Self {
        debug_assert!(m.iter().all(|v| v.is_finite()));
        DenseMatrix(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        DenseMatrix(self.0.transpose())
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::dim(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(DenseMatrix(&self.0 * &rhs.0))
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(DenseMatrix(&self.0 + &rhs.0))
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(DenseMatrix(&self.0 - &rhs.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        DenseMatrix(&self.0 * s)
    }

    /// Sub-matrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        DenseMatrix(DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])]))
    }

    /// `A A^T`.
    pub fn gram(&self) -> Self {
        DenseMatrix(&self.0 * self.0.transpose())
    }

    /// Largest absolute entry of `A - A^T`; infinite for non-square input.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in (j + 1)..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)]).abs());
            }
        }
        worst
    }

    fn same_shape(&self, rhs: &DenseMatrix) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::dim(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} {:?}", self.rows(), self.cols(), self.to_row_major())
    }
}

/// Tolerance used when checking that a square matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub(crate) fn check_symmetric(a: &DenseMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::dim(format!("expected a square matrix, got {:?}", a.shape())));
    }
    let scale = a.as_nalgebra().amax().max(1.0);
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = DenseMatrix::from_row_major(2, 2, &[1.0, f64::NAN, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
        assert!(DenseMatrix::from_row_major(1, 1, &[f64::INFINITY]).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let a = DenseMatrix::from_row_major(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(a[(0, 2)], 3.0);
        assert_eq!(a[(1, 0)], 4.0);
        assert_eq!(a.to_row_major(), vec![1., 2., 3., 4., 5., 6.]);
        assert_eq!(a.row(1), vec![4., 5., 6.]);
    }

    #[test]
    fn shape_errors() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        assert!(a.add(&DenseMatrix::zeros(3, 2)).is_err());
        assert!(DenseMatrix::from_row_major(2, 2, &[1.0]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}

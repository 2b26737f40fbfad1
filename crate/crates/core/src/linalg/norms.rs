use nalgebra::DMatrix;

use super::DenseMatrix;
use crate::{Error, Result};

fn nonempty(a: &DenseMatrix) -> Result<()> {
    if a.is_empty() {
        return Err(Error::dim("norm of an empty matrix"));
    }
    Ok(())
}

/// `max_i ||A(i,:)||_2`.
pub fn two_inf_norm(a: &DenseMatrix) -> Result<f64> {
    nonempty(a)?;
    let m = a.as_nalgebra();
    Ok((0..m.nrows())
        .map(|i| m.row(i).norm())
        .fold(0.0, f64::max))
}

/// `max_i ||A(i,:)||_1`.
pub fn one_inf_norm(a: &DenseMatrix) -> Result<f64> {
    nonempty(a)?;
    let m = a.as_nalgebra();
    Ok((0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

pub fn frobenius_norm(a: &DenseMatrix) -> Result<f64> {
    nonempty(a)?;
    Ok(a.as_nalgebra().norm())
}

/// Largest singular value.
///
/// Symmetric input uses its eigenvalues directly; otherwise the eigenvalues
/// of the smaller Gram matrix are used, which is accurate for the top of the
/// spectrum.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    nonempty(a)?;
    let m = a.as_nalgebra();
    if a.is_square() && a.asymmetry() == 0.0 {
        return Ok(sym_abs_max_eigenvalue(m.clone()));
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    Ok(sym_abs_max_eigenvalue(gram).sqrt())
}

fn sym_abs_max_eigenvalue(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].abs();
    }
    m.symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
}

/// `H(A) = A - diag(A)`.
pub fn hollow(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::dim(format!("hollowing needs a square matrix, got {:?}", a.shape())));
    }
    let mut m = a.as_nalgebra().clone();
    m.fill_diagonal(0.0);
    Ok(DenseMatrix::wrap(m))
}

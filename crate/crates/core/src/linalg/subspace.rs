use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{norms::two_inf_norm, DenseMatrix};
use crate::{Error, Result};

/// Input bases must satisfy `max |Q^T Q - I| <= ORTHONORMAL_TOL`.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SinThetaFlavor {
    Spectral,
    Frobenius,
}

/// `max |Q^T Q - I|` entrywise.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let m = q.as_nalgebra();
    let gram = m.transpose() * m;
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn check_orthonormal(q: &DenseMatrix) -> Result<()> {
    if q.cols() == 0 || q.cols() > q.rows() {
        return Err(Error::dim(format!("{:?} cannot have orthonormal columns", q.shape())));
    }
    let defect = orthonormality_defect(q);
    if defect > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal(defect));
    }
    Ok(())
}

fn check_pair(u: &DenseMatrix, uhat: &DenseMatrix) -> Result<()> {
    if u.shape() != uhat.shape() {
        return Err(Error::dim(format!("basis shapes differ: {:?} vs {:?}", u.shape(), uhat.shape())));
    }
    check_orthonormal(u)?;
    check_orthonormal(uhat)
}

/// Orthogonal `W_U = W_1 W_2^T` from the SVD `U^T Uhat = W_1 D W_2^T`;
/// the minimizer of `||Uhat - U O||_F` over orthogonal `O`.
pub fn procrustes_align(u: &DenseMatrix, uhat: &DenseMatrix) -> Result<DenseMatrix> {
    check_pair(u, uhat)?;
    Ok(DenseMatrix::wrap(polar_factor(u.as_nalgebra().transpose() * uhat.as_nalgebra())))
}

pub(crate) fn polar_factor(m: DMatrix<f64>) -> DMatrix<f64> {
    let (u, _, v) = super::decomp::small_svd(m);
    u * v.transpose()
}

/// Sine of the principal angles between `span(U)` and `span(Uhat)`.
///
/// Equal to `sqrt(1 - sigma_r^2(Uhat^T U))` (spectral) and
/// `sqrt(r - ||Uhat^T U||_F^2)` (Frobenius), but evaluated as the norm of
/// the residual `Uhat - U U^T Uhat`, which keeps full relative accuracy for
/// nearly aligned subspaces where the cosine form cancels.
pub fn sin_theta(u: &DenseMatrix, uhat: &DenseMatrix, flavor: SinThetaFlavor) -> Result<f64> {
    check_pair(u, uhat)?;
    let (um, vm) = (u.as_nalgebra(), uhat.as_nalgebra());
    let residual = vm - um * (um.transpose() * vm);
    let value = match flavor {
        SinThetaFlavor::Spectral => {
            let gram = residual.transpose() * &residual;
            let top = if gram.nrows() == 1 {
                gram[(0, 0)]
            } else {
                gram.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max)
            };
            top.max(0.0).sqrt().min(1.0)
        }
        SinThetaFlavor::Frobenius => residual.norm().min((u.cols() as f64).sqrt()),
    };
    Ok(value)
}

/// `||Uhat - U W_U||_{2,inf}`.
pub fn aligned_two_inf_error(u: &DenseMatrix, uhat: &DenseMatrix) -> Result<f64> {
    let w = procrustes_align(u, uhat)?;
    two_inf_norm(&uhat.sub(&u.matmul(&w)?)?)
}

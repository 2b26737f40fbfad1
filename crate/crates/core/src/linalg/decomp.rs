use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_symmetric, orthonormality_defect, tridiag, DenseMatrix};
use crate::{Error, Result};

/// Order in which eigenvalues are considered "leading".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenOrdering {
    /// `lambda_1 >= lambda_2 >= ...`
    #[default]
    Algebraic,
    /// `|lambda_1| >= |lambda_2| >= ...`, ties broken towards the larger value.
    /// Needed for indefinite matrices with large negative eigenvalues.
    Magnitude,
}

/// Rank-`r` leading factor of a matrix.
///
/// For symmetric input `spectrum` holds eigenvalues and `co_basis` is
/// `None`; for rectangular input it holds singular values and `co_basis`
/// holds the right singular vectors.
#[derive(Clone, Debug)]
pub struct SpectralPair {
    basis: DenseMatrix,
    spectrum: Vec<f64>,
    co_basis: Option<DenseMatrix>,
    next_value: f64,
    ordering: Option<EigenOrdering>,
}

impl SpectralPair {
    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn co_basis(&self) -> Option<&DenseMatrix> {
        self.co_basis.as_ref()
    }

    /// `lambda_(r+1)` or `d_(r+1)`; zero when `r` equals the smallest dimension.
    pub fn next_value(&self) -> f64 {
        self.next_value
    }

    pub fn rank(&self) -> usize {
        self.spectrum.len()
    }

    /// Eigenvalue ordering used, `None` for singular triplets.
    pub fn ordering(&self) -> Option<EigenOrdering> {
        self.ordering
    }

    /// r-th leading value (`lambda_r` or `d_r`).
    pub fn last_value(&self) -> f64 {
        *self.spectrum.last().expect("rank >= 1")
    }

    /// `U diag(spectrum) U^T` or `U D V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let u = self.basis.as_nalgebra();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.spectrum));
        let right = self.co_basis.as_ref().map_or(u, |v| v.as_nalgebra());
        DenseMatrix::wrap(u * d * right.transpose())
    }
}

/// Matrices at least this large use the selected-eigenpair solver.
const PARTIAL_MIN_DIM: usize = 128;

/// Re-orthonormalization kicks in above this drift.
const REORTHO_DRIFT: f64 = 1e-12;

pub(crate) fn sort_order(values: &[f64], ordering: EigenOrdering) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    match ordering {
        EigenOrdering::Algebraic => idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap()),
        EigenOrdering::Magnitude => idx.sort_by(|&a, &b| {
            values[b]
                .abs()
                .partial_cmp(&values[a].abs())
                .unwrap()
                .then(values[b].partial_cmp(&values[a]).unwrap())
        }),
    }
    idx
}

/// Full eigendecomposition of a symmetric matrix, sorted per `ordering`.
pub fn sym_eigen_full(y: &DenseMatrix, ordering: EigenOrdering) -> Result<(Vec<f64>, DenseMatrix)> {
    check_symmetric(y)?;
    if y.is_empty() {
        return Err(Error::dim("empty matrix"));
    }
    let eig = y.as_nalgebra().clone().symmetric_eigen();
    let order = sort_order(eig.eigenvalues.as_slice(), ordering);
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(y.rows(), y.rows(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, DenseMatrix::wrap(vectors)))
}

/// Top-`r` eigenpairs of a symmetric matrix, ordered algebraically.
pub fn leading_eigs(y: &DenseMatrix, r: usize) -> Result<SpectralPair> {
    leading_eigs_ordered(y, r, EigenOrdering::Algebraic)
}

pub fn leading_eigs_ordered(y: &DenseMatrix, r: usize, ordering: EigenOrdering) -> Result<SpectralPair> {
    check_symmetric(y)?;
    let n = y.rows();
    if r == 0 || r >= n {
        return Err(Error::dim(format!("rank {r} out of range for a {n}x{n} matrix (need 1 <= r < n)")));
    }
    let (values, basis) = if n >= PARTIAL_MIN_DIM {
        // symmetrize exactly; the reduction reads only one triangle
        let m = y.as_nalgebra();
        let sym = (m + m.transpose()) * 0.5;
        tridiag::leading_pairs(sym, r, ordering)
    } else {
        let (values, vectors) = sym_eigen_full(y, ordering)?;
        let basis = vectors.as_nalgebra().columns(0, r).into_owned();
        (values, basis)
    };
    Ok(SpectralPair {
        basis: DenseMatrix::wrap(reorthonormalize(basis)),
        spectrum: values[..r].to_vec(),
        co_basis: None,
        next_value: values[r],
        ordering: Some(ordering),
    })
}

/// Top-`r` eigenpairs of a symmetric operator known only through
/// `apply(x, y)`, which writes `y = A x`. Lanczos; `None` when it does not
/// settle within `max_steps`, so callers keep a dense fallback.
pub fn leading_eigs_operator(
    n: usize,
    apply: impl FnMut(&[f64], &mut [f64]),
    r: usize,
    ordering: EigenOrdering,
    max_steps: usize,
) -> Option<SpectralPair> {
    if r == 0 || r >= n {
        return None;
    }
    let (values, basis) = super::lanczos::leading_pairs(n, apply, r, ordering, max_steps)?;
    Some(SpectralPair {
        basis: DenseMatrix::wrap(reorthonormalize(basis)),
        spectrum: values[..r].to_vec(),
        co_basis: None,
        next_value: values[r],
        ordering: Some(ordering),
    })
}

/// Top-`r` singular triplets.
pub fn svd_r(x: &DenseMatrix, r: usize) -> Result<SpectralPair> {
    let (n, m) = x.shape();
    let k = n.min(m);
    if r == 0 || r >= k {
        return Err(Error::dim(format!("rank {r} out of range for a {n}x{m} matrix (need 1 <= r < min(n, m))")));
    }
    let (u, s, v) = thin_svd(x.as_nalgebra());
    let order = sort_order(&s, EigenOrdering::Algebraic);
    let pick = |mat: &DMatrix<f64>| DMatrix::from_fn(mat.nrows(), r, |i, j| mat[(i, order[j])]);
    Ok(SpectralPair {
        basis: DenseMatrix::wrap(reorthonormalize(pick(&u))),
        spectrum: order[..r].iter().map(|&j| s[j]).collect(),
        co_basis: Some(DenseMatrix::wrap(reorthonormalize(pick(&v)))),
        next_value: s[order[r]],
        ordering: None,
    })
}

/// Thin SVD `X = U diag(s) V^T` (unsorted). Strongly rectangular input is
/// first reduced by a QR factorization.
fn thin_svd(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (n, m) = x.shape();
    if 2 * m > 3 * n {
        // X^T = Q R  =>  X = R^T Q^T
        let qr = x.transpose().qr();
        let (q, rmat) = (qr.q(), qr.r());
        let (u, s, w) = small_svd(rmat.transpose());
        (u, s, q * w)
    } else if 2 * n > 3 * m {
        let qr = x.clone().qr();
        let (q, rmat) = (qr.q(), qr.r());
        let (u, s, v) = small_svd(rmat);
        (q * u, s, v)
    } else {
        small_svd(x.clone())
    }
}

/// Iteration cap for the bidiagonal QR sweeps, per column.
const SVD_ITERS_PER_COL: usize = 200;

/// `A = U diag(s) V^T` with `U` of shape `p x min(p, q)`.
///
/// nalgebra's implicit-shift iteration can stall on exactly rank-deficient
/// input (the expected SBM slice is one), so it runs with an iteration cap
/// and one-sided Jacobi takes over when the cap is hit.
pub(crate) fn small_svd(a: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let cap = SVD_ITERS_PER_COL * a.ncols().max(a.nrows()).max(10);
    if let Some(svd) = a.clone().try_svd(true, true, f64::EPSILON, cap) {
        let s = svd.singular_values.as_slice().to_vec();
        if s.iter().all(|v| v.is_finite()) {
            return (svd.u.unwrap(), s, svd.v_t.unwrap().transpose());
        }
    }
    if a.nrows() >= a.ncols() {
        jacobi_svd(a)
    } else {
        let (v, s, u) = jacobi_svd(a.transpose());
        (u, s, v)
    }
}

/// One-sided (Hestenes) Jacobi SVD of a matrix with `p >= q`. Slow but
/// unconditionally convergent, and small singular values keep high
/// relative accuracy, so an exact zero stays (numerically) zero.
fn jacobi_svd(mut a: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let q = a.ncols();
    let mut v = DMatrix::<f64>::identity(q, q);
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..q {
            for j in i + 1..q {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for row in 0..mat.nrows() {
                        let (x, y) = (mat[(row, i)], mat[(row, j)]);
                        mat[(row, i)] = c * x - s * y;
                        mat[(row, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let s: Vec<f64> = (0..q).map(|k| a.column(k).norm()).collect();
    for (k, &sk) in s.iter().enumerate() {
        if sk > 0.0 {
            a.column_mut(k).unscale_mut(sk);
        }
    }
    (a, s, v)
}

/// QR pass with the sign convention `diag(R) > 0`, so columns that are
/// already orthonormal come back unchanged up to rounding.
fn reorthonormalize(q: DMatrix<f64>) -> DMatrix<f64> {
    let wrapped = DenseMatrix::wrap(q);
    if orthonormality_defect(&wrapped) <= REORTHO_DRIFT {
        return wrapped.into_nalgebra();
    }
    let cols = wrapped.cols();
    let qr = wrapped.into_nalgebra().qr();
    let r = qr.r();
    let mut out = qr.q().columns(0, cols).into_owned();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{gaussian_matrix, gaussian_symmetric, random_orthonormal};
    use crate::linalg::{sin_theta, spectral_norm, SinThetaFlavor};
    use crate::rng::rng_from_seed;

    #[test]
    fn diagonal_leading_pair() {
        let y = DenseMatrix::from_diagonal(&[3.0, 2.0, 1.0]).unwrap();
        let p = leading_eigs(&y, 2).unwrap();
        assert_eq!(p.spectrum(), &[3.0, 2.0]);
        assert_eq!(p.next_value(), 1.0);
        let e12 = DenseMatrix::from_row_major(3, 2, &[1., 0., 0., 1., 0., 0.]).unwrap();
        assert!(sin_theta(&e12, p.basis(), SinThetaFlavor::Spectral).unwrap() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = DenseMatrix::from_row_major(2, 2, &[1., 2., 0., 1.]).unwrap();
        assert!(matches!(leading_eigs(&a, 1), Err(Error::NotSymmetric(_))));
        let y = DenseMatrix::identity(3);
        assert!(matches!(leading_eigs(&y, 0), Err(Error::Dimension(_))));
        assert!(matches!(leading_eigs(&y, 3), Err(Error::Dimension(_))));
        assert!(matches!(svd_r(&DenseMatrix::zeros(3, 2), 2), Err(Error::Dimension(_))));
    }

    fn constructed(n: usize, lams: &[f64], seed: u64) -> (DenseMatrix, DenseMatrix) {
        let u = random_orthonormal(&mut rng_from_seed(seed), n, lams.len());
        let d = DenseMatrix::from_diagonal(lams).unwrap();
        let y = u.matmul(&d).unwrap().matmul(&u.transpose()).unwrap();
        // exact symmetry
        let y = DenseMatrix::wrap((y.as_nalgebra() + y.as_nalgebra().transpose()) * 0.5);
        (y, u)
    }

    #[test]
    fn recovers_constructed_spectrum() {
        for n in [10, 150] {
            let lams = [5.0, 3.0, 2.0];
            let (y, u) = constructed(n, &lams, 4);
            let p = leading_eigs(&y, 3).unwrap();
            for (a, b) in p.spectrum().iter().zip(lams) {
                assert!((a - b).abs() < 1e-8);
            }
            assert!(sin_theta(&u, p.basis(), SinThetaFlavor::Spectral).unwrap() < 1e-8);
            // rank deficient: next eigenvalue vanishes
            assert!(p.next_value().abs() < 1e-8);
        }
    }

    #[test]
    fn magnitude_ordering_prefers_large_negative() {
        let y = DenseMatrix::from_diagonal(&[1.0, -5.0, 3.0, 0.5]).unwrap();
        let alg = leading_eigs(&y, 2).unwrap();
        assert_eq!(alg.spectrum(), &[3.0, 1.0]);
        let mag = leading_eigs_ordered(&y, 2, EigenOrdering::Magnitude).unwrap();
        assert_eq!(mag.spectrum(), &[-5.0, 3.0]);
        assert_eq!(mag.next_value(), 1.0);
    }

    #[test]
    fn partial_solver_agrees_with_full() {
        let mut rng = rng_from_seed(9);
        for (n, r) in [(130, 1), (160, 4), (200, 3)] {
            let y = gaussian_symmetric(&mut rng, n, 1.0);
            for ordering in [EigenOrdering::Algebraic, EigenOrdering::Magnitude] {
                let (values, vectors) = sym_eigen_full(&y, ordering).unwrap();
                let p = leading_eigs_ordered(&y, r, ordering).unwrap();
                for k in 0..r {
                    assert!((p.spectrum()[k] - values[k]).abs() < 1e-10, "{n} {r} {ordering:?}");
                }
                assert!((p.next_value() - values[r]).abs() < 1e-10);
                let full_basis = DenseMatrix::wrap(vectors.as_nalgebra().columns(0, r).into_owned());
                assert!(sin_theta(&full_basis, p.basis(), SinThetaFlavor::Spectral).unwrap() < 1e-7);
                assert!(orthonormality_defect(p.basis()) < 1e-12);
            }
        }
    }

    #[test]
    fn full_decomposition_reconstructs() {
        let y = gaussian_symmetric(&mut rng_from_seed(2), 30, 1.0);
        let (values, vectors) = sym_eigen_full(&y, EigenOrdering::Algebraic).unwrap();
        let v = vectors.as_nalgebra();
        let rec = v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(values)) * v.transpose();
        let err = DenseMatrix::wrap(rec - y.as_nalgebra());
        assert!(spectral_norm(&err).unwrap() <= 1e-8 * spectral_norm(&y).unwrap());
    }

    #[test]
    fn svd_of_embedded_diagonal() {
        let x = DenseMatrix::from_row_major(3, 2, &[5., 0., 0., 1., 0., 0.]).unwrap();
        let p = svd_r(&x, 1).unwrap();
        assert!((p.spectrum()[0] - 5.0).abs() < 1e-12);
        assert!((p.next_value() - 1.0).abs() < 1e-12);
        assert!((p.basis()[(0, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_recovers_constructed_triplets() {
        let mut rng = rng_from_seed(21);
        for (n, m) in [(12, 9), (8, 40), (40, 8)] {
            let u = random_orthonormal(&mut rng, n, 3);
            let v = random_orthonormal(&mut rng, m, 3);
            let d = DenseMatrix::from_diagonal(&[4.0, 2.0, 1.0]).unwrap();
            let x = u.matmul(&d).unwrap().matmul(&v.transpose()).unwrap();
            let p = svd_r(&x, 2).unwrap();
            assert!((p.spectrum()[0] - 4.0).abs() < 1e-10);
            assert!((p.spectrum()[1] - 2.0).abs() < 1e-10);
            assert!((p.next_value() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn jacobi_matches_bidiagonal_svd() {
        let mut rng = rng_from_seed(31);
        for (p, q) in [(9, 9), (30, 7), (5, 1)] {
            let a = gaussian_matrix(&mut rng, p, q, 1.0).into_nalgebra();
            let (u, s, v) = jacobi_svd(a.clone());
            let mut mine = s.clone();
            mine.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let theirs = a.clone().singular_values();
            for (x, y) in mine.iter().zip(theirs.iter()) {
                assert!((x - y).abs() < 1e-12 * theirs[0]);
            }
            let back = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s)) * v.transpose();
            assert!((back - &a).amax() < 1e-12 * theirs[0]);
            assert!((v.transpose() * &v - DMatrix::identity(q, q)).amax() < 1e-12);
        }
        // exact zero singular value stays tiny
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let (_, s, _) = jacobi_svd(b);
        assert!(s.iter().cloned().fold(f64::INFINITY, f64::min) < 1e-14);
    }

    #[test]
    fn best_rank_r_error_matches_tail() {
        let x = gaussian_matrix(&mut rng_from_seed(8), 50, 50, 1.0);
        let mut all: Vec<f64> = x.as_nalgebra().clone().singular_values().iter().copied().collect();
        all.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let tail = all[5..].iter().map(|d| d * d).sum::<f64>().sqrt();
        let p = svd_r(&x, 5).unwrap();
        let err = x.sub(&p.reconstruct()).unwrap().as_nalgebra().norm();
        assert!((err - tail).abs() < 1e-8);
    }
}

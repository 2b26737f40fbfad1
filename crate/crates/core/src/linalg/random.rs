//! Random matrices used by generators, tests and the demo.

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::DenseMatrix;
use crate::rng::Rng;

/// iid `N(0, sigma^2)` entries, drawn row by row.
pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize, sigma: f64) -> DenseMatrix {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let z: f64 = StandardNormal.sample(rng);
            m[(i, j)] = sigma * z;
        }
    }
    DenseMatrix::wrap(m)
}

/// Uniformly distributed (Haar) `n x r` matrix with orthonormal columns.
pub fn random_orthonormal(rng: &mut Rng, n: usize, r: usize) -> DenseMatrix {
    assert!(r <= n && r > 0);
    let g = gaussian_matrix(rng, n, r, 1.0).into_nalgebra();
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    // sign fix makes the distribution Haar
    for j in 0..r {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    DenseMatrix::wrap(q.columns(0, r).into_owned())
}

/// Haar-distributed `r x r` orthogonal matrix.
pub fn random_orthogonal(rng: &mut Rng, r: usize) -> DenseMatrix {
    random_orthonormal(rng, r, r)
}

/// Uniform entries in `[lo, hi)`.
pub fn uniform_matrix(rng: &mut Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DenseMatrix {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.random_range(lo..hi);
        }
    }
    DenseMatrix::wrap(m)
}

/// Symmetric matrix with iid `N(0, sigma^2)` entries on and above the diagonal.
pub fn gaussian_symmetric(rng: &mut Rng, n: usize, sigma: f64) -> DenseMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let z: f64 = StandardNormal.sample(rng);
            m[(i, j)] = sigma * z;
            m[(j, i)] = sigma * z;
        }
    }
    DenseMatrix::wrap(m)
}

//! Seeded random instances with known ground truth: a Gaussian mixture,
//! a sub-sampled block-model slice and a multilayer block model.

mod gaussian;
mod multilayer;
mod sbm;

use rand::seq::SliceRandom;
use rand::Rng as _;

pub use gaussian::{gen_gaussian_mixture, GaussianInstance, GaussianScenario};
pub use multilayer::{gen_multilayer, MultilayerInstance, MultilayerModel};
pub use sbm::{gen_sbm_slice, SbmInstance, SbmModel};

use crate::linalg::{leading_eigs_operator, leading_eigs_ordered, EigenOrdering, SpectralPair};
use crate::rng::Rng;
use crate::DenseMatrix;

/// Krylov dimension cap before [`Adjacency::leading_eigs`] falls back to
/// a dense solve.
const LANCZOS_STEPS: usize = 240;

/// Retries before a generator gives up on an unlucky draw.
pub const MAX_RETRIES: usize = 100;

/// Labels with cluster sizes differing by at most one, in random order.
pub fn balanced_labels(rng: &mut Rng, n: usize, r: usize) -> Vec<usize> {
    let mut z: Vec<usize> = (0..n).map(|i| i % r).collect();
    z.shuffle(rng);
    z
}

/// Undirected simple graph stored as its upper-triangle edge list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    /// `(i, j)` with `i < j`, sorted.
    edges: Vec<(u32, u32)>,
}

impl Adjacency {
    /// Independent Bernoulli edges with probability `prob(i, j)` for `i < j`,
    /// drawn in row-major order of the upper triangle.
    pub fn sample(rng: &mut Rng, n: usize, mut prob: impl FnMut(usize, usize) -> f64) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < prob(i, j) {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        Adjacency { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            m[(i as usize, j as usize)] = 1.0;
            m[(j as usize, i as usize)] = 1.0;
        }
        DenseMatrix::from_nalgebra(m).unwrap()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j) in &self.edges {
            let (i, j) = (i as usize, j as usize);
            y[i] += x[j];
            y[j] += x[i];
        }
    }

    /// Top-`r` eigenpairs under `ordering`. Lanczos on the edge list, with
    /// the dense solver as fallback.
    pub fn leading_eigs(&self, r: usize, ordering: EigenOrdering) -> crate::Result<SpectralPair> {
        match leading_eigs_operator(self.n, |x, y| self.apply(x, y), r, ordering, LANCZOS_STEPS) {
            Some(p) => Ok(p),
            None => leading_eigs_ordered(&self.to_dense(), r, ordering),
        }
    }

    /// Submatrix on `rows x cols`.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        let mut row_pos = vec![usize::MAX; self.n];
        let mut col_pos = vec![usize::MAX; self.n];
        rows.iter().enumerate().for_each(|(p, &i)| row_pos[i] = p);
        cols.iter().enumerate().for_each(|(p, &j)| col_pos[j] = p);
        let mut m = nalgebra::DMatrix::zeros(rows.len(), cols.len());
        for &(i, j) in &self.edges {
            let (i, j) = (i as usize, j as usize);
            for (a, b) in [(i, j), (j, i)] {
                if row_pos[a] != usize::MAX && col_pos[b] != usize::MAX {
                    m[(row_pos[a], col_pos[b])] = 1.0;
                }
            }
        }
        DenseMatrix::from_nalgebra(m).unwrap()
    }
}

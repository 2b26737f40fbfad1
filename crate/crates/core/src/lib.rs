//! Two-to-infinity norm perturbation toolkit for leading eigen- and singular
//! subspaces.
//!
//! The crate is split by concern:
//!
//! * [`linalg`]: dense matrices, norms, truncated decompositions, subspace
//!   distances, Procrustes alignment and the hollowing operator.
//! * [`bounds`]: error profiles and the upper-bound evaluators for the
//!   symmetric, rectangular and symmetrized estimators.
//! * [`clustering`]: approximate k-means, permutation-invariant
//!   misclustering counts and the spectral clustering pipeline with its
//!   certificates.
//! * [`generators`]: seeded Gaussian mixture, sub-sampled block model and
//!   multilayer network instances with their ground truth.
//! * [`io`]: dense CSV, Matrix Market and label-vector files.

pub mod bounds;
pub mod clustering;
mod error;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, EigenOrdering, SpectralPair};

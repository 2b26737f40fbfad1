//! Approximate k-means, label matching, spectral clustering and the audits
//! that certify (or bound) its mistakes.

mod assignment;
mod audit;
mod kmeans;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use assignment::{best_label_map, miscluster_count};
pub use audit::{abbe_fan_audit, certify_error, perfect_clustering_certificate, Certificate, KMeansAudit};
pub use kmeans::{approx_kmeans, KMeansParams};
pub use spectral::{embed, embed_gram, spectral_cluster, spectral_cluster_gram};

use crate::{DenseMatrix, Error, Result};

/// How the embedding rows are obtained from the observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusteringMode {
    /// Left singular vectors of `Xhat`.
    Direct,
    /// Leading eigenvectors of `Xhat Xhat^T`.
    Symmetrized,
    /// Leading eigenvectors of `Xhat Xhat^T` with its diagonal removed.
    SymmetrizedHollow,
}

impl ClusteringMode {
    pub const ALL: [ClusteringMode; 3] =
        [ClusteringMode::Direct, ClusteringMode::Symmetrized, ClusteringMode::SymmetrizedHollow];

    pub fn key(self) -> &'static str {
        match self {
            ClusteringMode::Direct => "direct",
            ClusteringMode::Symmetrized => "symmetrized",
            ClusteringMode::SymmetrizedHollow => "symmetrized-hollow",
        }
    }

    /// Whether the symmetrized estimate is hollowed.
    pub fn hollow(self) -> bool {
        self == ClusteringMode::SymmetrizedHollow
    }
}

impl fmt::Display for ClusteringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ClusteringMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClusteringMode::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::Domain(format!("unknown mode '{s}' (expected direct, symmetrized or symmetrized-hollow)")))
    }
}

/// Ground-truth clustering.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    z: Vec<usize>,
    sizes: Vec<usize>,
    means: Option<DenseMatrix>,
}

impl ClusterModel {
    /// `z` holds 0-based labels in `0..r`; every label must occur.
    pub fn new(z: Vec<usize>, r: usize, means: Option<DenseMatrix>) -> Result<Self> {
        if r == 0 || z.is_empty() {
            return Err(Error::Domain("a clustering needs r >= 1 and at least one point".into()));
        }
        let mut sizes = vec![0usize; r];
        for (i, &k) in z.iter().enumerate() {
            if k >= r {
                return Err(Error::Domain(format!("label {k} of point {i} is out of range for r = {r}")));
            }
            sizes[k] += 1;
        }
        if let Some(k) = sizes.iter().position(|&c| c == 0) {
            return Err(Error::Domain(format!("cluster {k} is empty")));
        }
        if let Some(b) = &means {
            if b.rows() != r {
                return Err(Error::dim(format!("means have {} rows, expected {r}", b.rows())));
            }
        }
        Ok(ClusterModel { z, sizes, means })
    }

    pub fn labels(&self) -> &[usize] {
        &self.z
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn r(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn means(&self) -> Option<&DenseMatrix> {
        self.means.as_ref()
    }

    pub fn n_max(&self) -> usize {
        *self.sizes.iter().max().unwrap()
    }

    pub fn n_min(&self) -> usize {
        *self.sizes.iter().min().unwrap()
    }

    /// Smallest `c0` with `n_max <= c0^2 n_min`.
    pub fn balance(&self) -> f64 {
        (self.n_max() as f64 / self.n_min() as f64).sqrt()
    }

    /// Binary `n x r` membership matrix.
    pub fn membership(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n(), self.r(), |i, k| if self.z[i] == k { 1.0 } else { 0.0 }).unwrap()
    }

    /// `Z diag(n_k)^{-1/2}`, which has orthonormal columns.
    pub fn normalized_membership(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n(), self.r(), |i, k| {
            if self.z[i] == k {
                1.0 / (self.sizes[k] as f64).sqrt()
            } else {
                0.0
            }
        })
        .unwrap()
    }
}

/// Output of k-means on embedding rows.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterResult {
    pub zhat: Vec<usize>,
    pub centers: DenseMatrix,
    pub objective: f64,
    pub restarts_used: usize,
    /// Set by the spectral pipeline.
    pub mode: Option<ClusteringMode>,
}

use super::{approx_kmeans, ClusterResult, ClusteringMode, KMeansParams};
use crate::bounds::symmetrize_estimate;
use crate::linalg::{hollow, leading_eigs, svd_r};
use crate::{DenseMatrix, Result, SpectralPair};

/// Rank-`r` embedding of the rows of `xhat` for the given mode.
pub fn embed(xhat: &DenseMatrix, r: usize, mode: ClusteringMode) -> Result<SpectralPair> {
    match mode {
        ClusteringMode::Direct => svd_r(xhat, r),
        _ => leading_eigs(&symmetrize_estimate(xhat, mode.hollow()), r),
    }
}

/// Same as [`embed`] but from the Gram matrix `xhat xhat^T` alone, for
/// observations too wide to hold densely. In direct mode the left singular
/// vectors are the leading eigenvectors of the Gram matrix.
pub fn embed_gram(gram: &DenseMatrix, r: usize, mode: ClusteringMode) -> Result<SpectralPair> {
    if mode.hollow() {
        leading_eigs(&hollow(gram)?, r)
    } else {
        leading_eigs(gram, r)
    }
}

fn cluster_basis(pair: &SpectralPair, r: usize, mode: ClusteringMode, params: &KMeansParams) -> Result<ClusterResult> {
    let mut res = approx_kmeans(pair.basis(), r, params)?;
    res.mode = Some(mode);
    Ok(res)
}

/// Clusters the rows of `xhat` into `r` groups through a rank-`r` embedding.
pub fn spectral_cluster(
    xhat: &DenseMatrix,
    r: usize,
    mode: ClusteringMode,
    params: &KMeansParams,
) -> Result<ClusterResult> {
    cluster_basis(&embed(xhat, r, mode)?, r, mode, params)
}

pub fn spectral_cluster_gram(
    gram: &DenseMatrix,
    r: usize,
    mode: ClusteringMode,
    params: &KMeansParams,
) -> Result<ClusterResult> {
    cluster_basis(&embed_gram(gram, r, mode)?, r, mode, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{miscluster_count, ClusterModel};
    use crate::linalg::random::{gaussian_matrix, random_orthogonal};
    use crate::linalg::{sin_theta, SinThetaFlavor};
    use crate::rng::rng_from_seed;

    fn noiseless(seed: u64) -> (DenseMatrix, ClusterModel) {
        let mut rng = rng_from_seed(seed);
        let z: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let model = ClusterModel::new(z, 3, None).unwrap();
        let theta = gaussian_matrix(&mut rng, 3, 8, 1.0);
        (model.membership().matmul(&theta).unwrap(), model)
    }

    #[test]
    fn noiseless_recovery_in_unhollowed_modes() {
        for seed in 0..5 {
            let (x, model) = noiseless(seed);
            for mode in [ClusteringMode::Direct, ClusteringMode::Symmetrized] {
                let res = spectral_cluster(&x, 3, mode, &KMeansParams::default()).unwrap();
                assert_eq!(res.mode, Some(mode));
                assert_eq!(miscluster_count(&res.zhat, model.labels(), 3).unwrap(), 0);
            }
        }
    }

    #[test]
    fn gram_embedding_matches_dense() {
        let (x, _) = noiseless(7);
        let xhat = x.add(&gaussian_matrix(&mut rng_from_seed(8), 30, 8, 0.1)).unwrap();
        for mode in ClusteringMode::ALL {
            let a = embed(&xhat, 3, mode).unwrap();
            let b = embed_gram(&xhat.gram(), 3, mode).unwrap();
            assert!(sin_theta(a.basis(), b.basis(), SinThetaFlavor::Spectral).unwrap() < 1e-8);
        }
    }

    #[test]
    fn rotation_of_embedding_does_not_change_partition() {
        let (x, _) = noiseless(11);
        let xhat = x.add(&gaussian_matrix(&mut rng_from_seed(12), 30, 8, 0.05)).unwrap();
        let pair = embed(&xhat, 3, ClusteringMode::Direct).unwrap();
        let o = random_orthogonal(&mut rng_from_seed(13), 3);
        let p = KMeansParams::default();
        let a = approx_kmeans(pair.basis(), 3, &p).unwrap();
        let b = approx_kmeans(&pair.basis().matmul(&o).unwrap(), 3, &p).unwrap();
        assert_eq!(miscluster_count(&a.zhat, &b.zhat, 3).unwrap(), 0);
    }
}

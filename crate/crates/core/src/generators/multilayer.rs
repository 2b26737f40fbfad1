use nalgebra::DMatrix;
use rand::Rng as _;

use super::{balanced_labels, Adjacency, MAX_RETRIES};
use crate::clustering::ClusterModel;
use crate::linalg::{leading_eigs_ordered, EigenOrdering};
use crate::rng::{child_rng, derive_seed};
use crate::{DenseMatrix, Error, Result};

/// `L` network layers on `n` shared nodes. Layers in group `g` are block
/// models over a group-specific partition of the nodes into `k[g]`
/// communities, so `P_l = U_g Q_l U_g^T` with `U_g` the normalized
/// membership matrix of that partition.
#[derive(Clone, Debug)]
pub struct MultilayerModel {
    n: usize,
    k: Vec<usize>,
    layer_groups: Vec<usize>,
    node_labels: Vec<Vec<usize>>,
    /// Block probabilities per layer, entries in `[0, rho]`.
    blocks: Vec<DenseMatrix>,
    rho: f64,
    seed: u64,
    /// Use the expected layers `P_l` instead of sampled graphs.
    pub noiseless: bool,
}

/// Minimum `sigma_K(Q_l) / sigma_1(Q_l)` accepted for a layer.
pub const LOADING_CONDITION: f64 = 0.1;

impl MultilayerModel {
    /// Balanced layer groups and node partitions; block probabilities are
    /// `rho` times a matrix with diagonal in `[0.6, 1]` and off-diagonal
    /// entries in `[0, 0.3]`.
    pub fn random(n: usize, layers: usize, k: Vec<usize>, rho: f64, seed: u64) -> Result<Self> {
        let groups = k.len();
        let mut problems = Vec::new();
        if groups == 0 || layers < groups {
            problems.push(format!("need 1 <= M <= L, got M={groups}, L={layers}"));
        }
        if k.iter().any(|&kg| kg == 0 || kg >= n) {
            problems.push(format!("community counts {k:?} must lie in 1..{n}"));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            problems.push(format!("rho must lie in (0, 1], got {rho}"));
        }
        if !problems.is_empty() {
            return Err(Error::Domain(problems.join("; ")));
        }
        let layer_groups = balanced_labels(&mut child_rng(seed, 0), layers, groups);
        let node_seed = derive_seed(seed, 1);
        let node_labels: Vec<Vec<usize>> =
            (0..groups).map(|g| balanced_labels(&mut child_rng(node_seed, g as u64), n, k[g])).collect();
        let block_seed = derive_seed(seed, 2);
        let mut blocks = Vec::with_capacity(layers);
        for l in 0..layers {
            let kg = k[layer_groups[l]];
            let sizes = ClusterModel::new(node_labels[layer_groups[l]].clone(), kg, None)?.sizes().to_vec();
            let mut rng = child_rng(block_seed, l as u64);
            let mut accepted = None;
            for _ in 0..MAX_RETRIES {
                let mut b = DMatrix::zeros(kg, kg);
                for i in 0..kg {
                    b[(i, i)] = rng.random_range(0.6..=1.0);
                    for j in i + 1..kg {
                        let v = rng.random_range(0.0..=0.3);
                        b[(i, j)] = v;
                        b[(j, i)] = v;
                    }
                }
                b *= rho;
                if loading_condition(&b, &sizes) >= LOADING_CONDITION {
                    accepted = Some(b);
                    break;
                }
            }
            let b = accepted.ok_or_else(|| Error::Generation(format!("layer {l}: loadings stayed ill-conditioned")))?;
            blocks.push(DenseMatrix::from_nalgebra(b)?);
        }
        Ok(MultilayerModel { n, k, layer_groups, node_labels, blocks, rho, seed, noiseless: false })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> usize {
        self.layer_groups.len()
    }

    pub fn groups(&self) -> usize {
        self.k.len()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layer_groups(&self) -> &[usize] {
        &self.layer_groups
    }

    pub fn rank_of_layer(&self, l: usize) -> usize {
        self.k[self.layer_groups[l]]
    }

    /// Normalized membership matrix of group `g`'s node partition.
    pub fn group_basis(&self, g: usize) -> DenseMatrix {
        ClusterModel::new(self.node_labels[g].clone(), self.k[g], None).unwrap().normalized_membership()
    }

    /// `Q_l = D^{1/2} B_l D^{1/2}` so that `P_l = U_g Q_l U_g^T`.
    pub fn loading(&self, l: usize) -> DenseMatrix {
        let g = self.layer_groups[l];
        let sizes = ClusterModel::new(self.node_labels[g].clone(), self.k[g], None).unwrap().sizes().to_vec();
        let b = self.blocks[l].as_nalgebra();
        DenseMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * (sizes[i] as f64 * sizes[j] as f64).sqrt())
            .unwrap()
    }

    pub fn prob(&self, l: usize, i: usize, j: usize) -> f64 {
        let c = &self.node_labels[self.layer_groups[l]];
        self.blocks[l][(c[i], c[j])]
    }

    pub fn expected_layer(&self, l: usize) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.prob(l, i, j)).unwrap()
    }
}

fn loading_condition(b: &DMatrix<f64>, sizes: &[usize]) -> f64 {
    let q = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * (sizes[i] as f64 * sizes[j] as f64).sqrt());
    let sv = q.singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    lo / hi
}

#[derive(Clone, Debug)]
pub struct MultilayerInstance {
    /// Sampled graphs; empty for a noiseless model.
    pub layers: Vec<Adjacency>,
    /// Leading eigenvectors of each layer, `n x K_l`.
    pub layer_bases: Vec<DenseMatrix>,
    /// Eigenvalue ordering used for the layer bases.
    pub ordering: EigenOrdering,
    pub group_bases: Vec<DenseMatrix>,
    /// Clustering of the layers into groups.
    pub model: ClusterModel,
}

/// `||A^T B||_F^2`, the inner product of `vec(A A^T)` and `vec(B B^T)`.
fn projector_inner(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a.as_nalgebra().transpose() * b.as_nalgebra()).norm_squared()
}

fn projector_row(basis: &DenseMatrix) -> Vec<f64> {
    let p = basis.as_nalgebra() * basis.as_nalgebra().transpose();
    let n = p.nrows();
    (0..n * n).map(|idx| p[(idx / n, idx % n)]).collect()
}

impl MultilayerInstance {
    /// `Xhat Xhat^T` for the `L x n^2` matrix with rows `vec(Uhat_l Uhat_l^T)`,
    /// computed without forming it.
    pub fn xhat_gram(&self) -> DenseMatrix {
        let l = self.layer_bases.len();
        let mut g = DMatrix::zeros(l, l);
        for i in 0..l {
            for j in i..l {
                let v = projector_inner(&self.layer_bases[i], &self.layer_bases[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        DenseMatrix::from_nalgebra(g).unwrap()
    }

    /// `X X^T` for the truth rows `vec(U_g U_g^T)`.
    pub fn x_gram(&self) -> DenseMatrix {
        let z = self.model.labels();
        let l = z.len();
        let bases = &self.group_bases;
        DenseMatrix::from_fn(l, l, |i, j| projector_inner(&bases[z[i]], &bases[z[j]])).unwrap()
    }

    /// The `L x n^2` observation itself; `O(L n^2)` memory.
    pub fn xhat_dense(&self) -> DenseMatrix {
        let rows: Vec<Vec<f64>> = self.layer_bases.iter().map(projector_row).collect();
        DenseMatrix::from_rows(&rows).unwrap()
    }

    pub fn x_dense(&self) -> DenseMatrix {
        let rows: Vec<Vec<f64>> = self.model.labels().iter().map(|&g| projector_row(&self.group_bases[g])).collect();
        DenseMatrix::from_rows(&rows).unwrap()
    }
}

/// Samples every layer (stream `l` under the model seed) and embeds it with
/// its `K_l` eigenvectors of largest magnitude.
pub fn gen_multilayer(model: &MultilayerModel) -> Result<MultilayerInstance> {
    let graph_seed = derive_seed(model.seed, 3);
    let mut layers = Vec::new();
    let mut layer_bases = Vec::with_capacity(model.layers());
    for l in 0..model.layers() {
        let k = model.rank_of_layer(l);
        let pair = if model.noiseless {
            leading_eigs_ordered(&model.expected_layer(l), k, EigenOrdering::Magnitude)?
        } else {
            let a = Adjacency::sample(&mut child_rng(graph_seed, l as u64), model.n, |i, j| model.prob(l, i, j));
            let pair = a.leading_eigs(k, EigenOrdering::Magnitude)?;
            layers.push(a);
            pair
        };
        layer_bases.push(pair.basis().clone());
    }
    Ok(MultilayerInstance {
        layers,
        layer_bases,
        ordering: EigenOrdering::Magnitude,
        group_bases: (0..model.groups()).map(|g| model.group_basis(g)).collect(),
        model: ClusterModel::new(model.layer_groups.clone(), model.groups(), None)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{miscluster_count, spectral_cluster_gram, ClusteringMode, KMeansParams};
    use crate::linalg::spectral_norm;

    #[test]
    fn expected_layers_factor_through_group_bases() {
        let model = MultilayerModel::random(30, 6, vec![2, 3], 0.4, 1).unwrap();
        for l in 0..6 {
            let u = model.group_basis(model.layer_groups()[l]);
            let p = u.matmul(&model.loading(l)).unwrap().matmul(&u.transpose()).unwrap();
            let expected = model.expected_layer(l);
            assert!(spectral_norm(&p.sub(&expected).unwrap()).unwrap() <= 1e-8 * spectral_norm(&expected).unwrap());
            assert!(expected.to_row_major().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn noiseless_layers_reproduce_truth() {
        let mut model = MultilayerModel::random(24, 9, vec![2, 2, 2], 0.5, 2).unwrap();
        model.noiseless = true;
        let inst = gen_multilayer(&model).unwrap();
        let diff = inst.xhat_dense().sub(&inst.x_dense()).unwrap();
        assert!(diff.as_nalgebra().amax() < 1e-10);
        let res = spectral_cluster_gram(&inst.xhat_gram(), 3, ClusteringMode::Direct, &KMeansParams::default()).unwrap();
        assert_eq!(miscluster_count(&res.zhat, inst.model.labels(), 3).unwrap(), 0);
    }

    #[test]
    fn truth_rows_have_norm_k() {
        let model = MultilayerModel::random(20, 4, vec![2, 3], 0.5, 3).unwrap();
        let inst = gen_multilayer(&model).unwrap();
        let x = inst.x_dense();
        for l in 0..4 {
            let k = model.rank_of_layer(l) as f64;
            let norm2: f64 = x.row(l).iter().map(|v| v * v).sum();
            assert!((norm2 - k).abs() < 1e-10);
        }
        let g = inst.xhat_gram();
        let dense = inst.xhat_dense();
        assert!(g.sub(&dense.gram()).unwrap().as_nalgebra().amax() < 1e-10);
        for a in &inst.layers {
            assert_eq!(a.to_dense().asymmetry(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(MultilayerModel::random(10, 2, vec![2, 2, 2], 0.5, 0).is_err());
        assert!(MultilayerModel::random(10, 4, vec![2], 1.5, 0).is_err());
        assert!(MultilayerModel::random(10, 4, vec![10], 0.5, 0).is_err());
    }
}

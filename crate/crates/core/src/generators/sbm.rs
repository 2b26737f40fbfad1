use nalgebra::{DMatrix, DVector};
use rand::seq::index;

use super::{balanced_labels, Adjacency, MAX_RETRIES};
use crate::clustering::ClusterModel;
use crate::rng::child_rng;
use crate::{DenseMatrix, Error, Result};

/// Block model `P = rho Z Q0 Z^T` of which a random group of `m` nodes is
/// observed against the remaining nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SbmModel {
    n: usize,
    z: Vec<usize>,
    q0: DenseMatrix,
    rho: f64,
    sample_size: usize,
    seed: u64,
}

impl SbmModel {
    /// Checks the connectivity matrix (symmetric, entries in `[0, 1]`, max
    /// entry 1, `sigma_r >= c_sigma sigma_1`) and the balance of `z`.
    pub fn new(
        z: Vec<usize>,
        q0: DenseMatrix,
        rho: f64,
        sample_size: usize,
        c_sigma: f64,
        balance: f64,
        seed: u64,
    ) -> Result<Self> {
        let r = q0.rows();
        let n = z.len();
        let model = ClusterModel::new(z.clone(), r, None)?;
        let mut problems = Vec::new();
        if !q0.is_square() || q0.asymmetry() > 0.0 {
            problems.push("Q0 must be square and symmetric".to_string());
        }
        let entries = q0.to_row_major();
        if entries.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            problems.push("Q0 entries must lie in [0, 1]".into());
        }
        if entries.iter().cloned().fold(0.0, f64::max) != 1.0 {
            problems.push("Q0 must have max entry 1".into());
        }
        if !(rho > 0.0 && rho <= 1.0) {
            problems.push(format!("rho must lie in (0, 1], got {rho}"));
        }
        if sample_size == 0 || sample_size >= n {
            problems.push(format!("sample size {sample_size} must lie in 1..{n}"));
        }
        let sv = q0.as_nalgebra().singular_values();
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        if lo < c_sigma * hi {
            problems.push(format!("Q0 condition {:.3} below {c_sigma}", lo / hi));
        }
        if model.balance() > balance {
            problems.push(format!("cluster sizes {:?} violate balance {balance}", model.sizes()));
        }
        if !problems.is_empty() {
            return Err(Error::Domain(problems.join("; ")));
        }
        Ok(SbmModel { n, z, q0, rho, sample_size, seed })
    }

    /// Balanced labels and `Q0 = (1 - b) I + b 1 1^T`.
    pub fn assortative(n: usize, r: usize, b: f64, rho: f64, sample_size: usize, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&b) {
            return Err(Error::Domain(format!("off-diagonal weight b must lie in [0, 1), got {b}")));
        }
        let q0 = DenseMatrix::from_fn(r, r, |i, j| if i == j { 1.0 } else { b })?;
        let z = balanced_labels(&mut child_rng(seed, 0), n, r);
        SbmModel::new(z, q0, rho, sample_size, 0.05, 1.5, seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.q0.rows()
    }

    pub fn labels(&self) -> &[usize] {
        &self.z
    }

    pub fn q0(&self) -> &DenseMatrix {
        &self.q0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.rho * self.q0[(self.z[i], self.z[j])]
    }
}

#[derive(Clone, Debug)]
pub struct SbmInstance {
    pub adjacency: Adjacency,
    /// Sampled group, sorted.
    pub sample: Vec<usize>,
    /// Its complement, sorted.
    pub rest: Vec<usize>,
    /// `A` restricted to sample x rest.
    pub xhat: DenseMatrix,
    /// `P` restricted to sample x rest.
    pub x: DenseMatrix,
    /// Clustering of the sampled nodes.
    pub model: ClusterModel,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    /// Nonzero singular values of `x`, descending.
    pub d: Vec<f64>,
}

fn covers(labels: &[usize], r: usize) -> bool {
    let mut seen = vec![false; r];
    labels.iter().for_each(|&k| seen[k] = true);
    seen.into_iter().all(|s| s)
}

/// Draws the sample with stream 1 and the graph with stream 2 of the
/// model seed.
pub fn gen_sbm_slice(model: &SbmModel) -> Result<SbmInstance> {
    let (n, r, m) = (model.n, model.r(), model.sample_size);
    let mut rng = child_rng(model.seed, 1);
    let mut sample = None;
    for _ in 0..MAX_RETRIES {
        let mut s = index::sample(&mut rng, n, m).into_vec();
        s.sort_unstable();
        let mut in_s = vec![false; n];
        s.iter().for_each(|&i| in_s[i] = true);
        let rest: Vec<usize> = (0..n).filter(|&i| !in_s[i]).collect();
        let zs: Vec<usize> = s.iter().map(|&i| model.z[i]).collect();
        let zr: Vec<usize> = rest.iter().map(|&i| model.z[i]).collect();
        if covers(&zs, r) && covers(&zr, r) {
            sample = Some((s, rest, zs, zr));
            break;
        }
    }
    let (sample, rest, zs, zr) =
        sample.ok_or_else(|| Error::Generation(format!("no sample of {m} nodes covered all {r} communities")))?;

    let adjacency = Adjacency::sample(&mut child_rng(model.seed, 2), n, |i, j| model.prob(i, j));
    let xhat = adjacency.block(&sample, &rest);

    let cm = ClusterModel::new(zs, r, Some(model.q0.scale(model.rho)))?;
    let rest_model = ClusterModel::new(zr, r, None)?;
    let x = cm
        .membership()
        .matmul(&model.q0.scale(model.rho))?
        .matmul(&rest_model.membership().transpose())?;

    // X = U_S (D_S^{1/2} rho Q0 D_rest^{1/2}) U_rest^T; the SVD of the middle factor rotates both sides
    let half = |c: &ClusterModel| DMatrix::from_diagonal(&DVector::from_iterator(r, c.sizes().iter().map(|&k| (k as f64).sqrt())));
    let middle = half(&cm) * model.q0.as_nalgebra() * model.rho * half(&rest_model);
    let svd = middle.svd(true, true);
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let uq = DMatrix::from_fn(r, r, |i, j| svd.u.as_ref().unwrap()[(i, order[j])]);
    let vq = DMatrix::from_fn(r, r, |i, j| svd.v_t.as_ref().unwrap()[(order[j], i)]);
    let d = order.iter().map(|&k| svd.singular_values[k]).collect();
    let u = DenseMatrix::from_nalgebra(cm.normalized_membership().as_nalgebra() * uq)?;
    let v = DenseMatrix::from_nalgebra(rest_model.normalized_membership().as_nalgebra() * vq)?;
    Ok(SbmInstance { adjacency, sample, rest, xhat, x, model: cm, u, v, d })
}

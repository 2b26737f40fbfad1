//! Browser demo for `twoinf-core`. Two operations are exported to
//! JavaScript:
//!
//! * [`noise_curve`]: subspace errors and their upper bounds as the noise
//!   level grows, for one fixed low-rank symmetric matrix.
//! * [`embed_mixture`]: the 2-D spectral embedding of a two-cluster
//!   Gaussian mixture, with true and estimated labels.
//!
//! The computations live in plain Rust functions so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use std::str::FromStr;

use twoinf_core::bounds::{davis_kahan_bound, sym_error_profile, sym_two_inf_bound};
use twoinf_core::clustering::{
    approx_kmeans, best_label_map, embed, miscluster_count, perfect_clustering_certificate, ClusteringMode,
    KMeansParams,
};
use twoinf_core::generators::{gen_gaussian_mixture, GaussianScenario};
use twoinf_core::linalg::random::{gaussian_matrix, gaussian_symmetric, random_orthonormal};
use twoinf_core::linalg::{
    aligned_two_inf_error, leading_eigs, procrustes_align, sin_theta, spectral_norm, SinThetaFlavor,
};
use twoinf_core::rng::{derive_seed, rng_from_seed};
use twoinf_core::DenseMatrix;
use wasm_bindgen::prelude::*;

/// Values per noise level in [`noise_curve`]: relative noise
/// `||E|| / lambda_r`, sin-theta distance, gap bound, aligned
/// two-to-infinity error, explicit two-to-infinity bound (NaN when its
/// preconditions fail).
pub const CURVE_STRIDE: usize = 5;

fn err(e: impl ToString) -> String {
    e.to_string()
}

/// Rank-`r` `Y = U diag(1 + (r-1-k)/r) U^T`, so `lambda_r = 1` and the gap
/// is 1. With `spiky`, `U` is close to coordinate vectors, which makes the
/// two-to-infinity error much smaller than the spectral one.
fn low_rank(n: usize, r: usize, spiky: bool, seed: u64) -> Result<(DenseMatrix, DenseMatrix), String> {
    let mut rng = rng_from_seed(seed);
    let u = if spiky {
        let g = gaussian_matrix(&mut rng, n, r, 0.05);
        let mut m = g.as_nalgebra().clone();
        for k in 0..r {
            m[(k, k)] += 1.0;
        }
        let q = m.qr().q();
        DenseMatrix::from_nalgebra(q.columns(0, r).into_owned()).map_err(err)?
    } else {
        random_orthonormal(&mut rng, n, r)
    };
    let values: Vec<f64> = (0..r).map(|k| 1.0 + (r - 1 - k) as f64 / r as f64).collect();
    let d = DenseMatrix::from_diagonal(&values).map_err(err)?;
    let y = u.matmul(&d).and_then(|ud| ud.matmul(&u.transpose())).map_err(err)?;
    Ok((y, u))
}

/// Flattened rows of [`CURVE_STRIDE`] values for `levels` noise levels,
/// log-spaced in `[1e-3, 1]` relative to `lambda_r`. One noise draw is
/// rescaled across levels so the curves are smooth.
pub fn noise_curve_rows(n: usize, r: usize, levels: usize, spiky: bool, seed: u64) -> Result<Vec<f64>, String> {
    if !(1..=400).contains(&n) || r == 0 || r >= n || levels < 2 {
        return Err(format!("need 1 <= r < n <= 400 and at least 2 levels (n={n}, r={r}, levels={levels})"));
    }
    let (y, u) = low_rank(n, r, spiky, seed)?;
    let g = gaussian_symmetric(&mut rng_from_seed(derive_seed(seed, 1)), n, 1.0);
    let g = g.scale(1.0 / spectral_norm(&g).map_err(err)?);
    let mut out = Vec::with_capacity(levels * CURVE_STRIDE);
    for k in 0..levels {
        let level = 10f64.powf(-3.0 + 3.0 * k as f64 / (levels - 1) as f64);
        let e = g.scale(level);
        let yhat = y.add(&e).map_err(err)?;
        let p = sym_error_profile(&y, &yhat, r).map_err(err)?;
        let uhat = leading_eigs(&yhat, r).map_err(err)?.basis().clone();
        let gap_bound = davis_kahan_bound(&p, SinThetaFlavor::Spectral, level).map_err(err)?;
        let explicit = sym_two_inf_bound(&p).map_err(err)?;
        out.extend([
            level,
            sin_theta(&u, &uhat, SinThetaFlavor::Spectral).map_err(err)?,
            gap_bound.value,
            aligned_two_inf_error(&u, &uhat).map_err(err)?,
            if explicit.preconditions_met { explicit.value } else { f64::NAN },
        ]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = noiseCurve)]
pub fn noise_curve(n: usize, r: usize, levels: usize, spiky: bool, seed: u32) -> Result<Vec<f64>, JsError> {
    noise_curve_rows(n, r, levels, spiky, seed as u64).map_err(|e| JsError::new(&e))
}

/// Two-cluster mixture embedded in the plane.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct Embedding {
    coords: Vec<f64>,
    centers: Vec<f64>,
    truth: Vec<u32>,
    estimate: Vec<u32>,
    misclustered: usize,
    two_inf_error: f64,
    certified: bool,
}

#[wasm_bindgen]
impl Embedding {
    /// Estimated rows, rotated onto the truth, as `x0, y0, x1, y1, ...`.
    #[wasm_bindgen(getter)]
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    /// The two distinct rows of the true basis.
    #[wasm_bindgen(getter)]
    pub fn centers(&self) -> Vec<f64> {
        self.centers.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<u32> {
        self.truth.clone()
    }

    /// Estimated labels, renamed to agree with the truth where possible.
    #[wasm_bindgen(getter)]
    pub fn estimate(&self) -> Vec<u32> {
        self.estimate.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn misclustered(&self) -> usize {
        self.misclustered
    }

    #[wasm_bindgen(getter, js_name = twoInfError)]
    pub fn two_inf_error(&self) -> f64 {
        self.two_inf_error
    }

    /// Whether the perfect-clustering certificate fired.
    #[wasm_bindgen(getter)]
    pub fn certified(&self) -> bool {
        self.certified
    }
}

pub fn embed_mixture_rows(n: usize, m: usize, sigma: f64, mode: &str, seed: u64) -> Result<Embedding, String> {
    if n > 2000 || m > 2000 {
        return Err("n and m are capped at 2000 in the browser".into());
    }
    let mode = ClusteringMode::from_str(mode).map_err(err)?;
    let g = gen_gaussian_mixture(&GaussianScenario::new(n, m, 2, 1.0, sigma, seed)).map_err(err)?;
    let uhat = embed(&g.xhat, 2, mode).map_err(err)?.basis().clone();
    let res = approx_kmeans(&uhat, 2, &KMeansParams { seed: derive_seed(seed, 2), ..Default::default() }).map_err(err)?;
    let z = g.model.labels();
    // rename estimated labels to the matching true label
    let phi = best_label_map(&res.zhat, z, 2).map_err(err)?;
    let mut rename = [0u32; 2];
    for (t, &e) in phi.iter().enumerate() {
        rename[e] = t as u32;
    }
    let w = procrustes_align(&g.u, &uhat).map_err(err)?;
    let rotated = uhat.matmul(&w.transpose()).map_err(err)?;
    let mut centers = vec![0.0; 4];
    for k in 0..2 {
        let i = z.iter().position(|&l| l == k).expect("both clusters are nonempty");
        centers[2 * k] = g.u.get(i, 0);
        centers[2 * k + 1] = g.u.get(i, 1);
    }
    let certificate = perfect_clustering_certificate(&uhat, &g.u, &g.model).map_err(err)?;
    Ok(Embedding {
        coords: rotated.to_row_major(),
        centers,
        truth: z.iter().map(|&k| k as u32).collect(),
        estimate: res.zhat.iter().map(|&k| rename[k]).collect(),
        misclustered: miscluster_count(&res.zhat, z, 2).map_err(err)?,
        two_inf_error: aligned_two_inf_error(&g.u, &uhat).map_err(err)?,
        certified: certificate.fired,
    })
}

#[wasm_bindgen(js_name = embedMixture)]
pub fn embed_mixture(n: usize, m: usize, sigma: f64, mode: &str, seed: u32) -> Result<Embedding, JsError> {
    embed_mixture_rows(n, m, sigma, mode, seed as u64).map_err(|e| JsError::new(&e))
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{balanced_labels, MAX_RETRIES};
use crate::clustering::ClusterModel;
use crate::linalg::random::gaussian_matrix;
use crate::rng::{child_rng, Rng};
use crate::{DenseMatrix, Error, Result};

/// Mixture `X = Z Theta` observed with iid Gaussian noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianScenario {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    /// Mean-row scale: rows of `Theta` have norm `sqrt(m) theta`.
    pub theta: f64,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Regime exponents `n = m^gamma`, `sigma / theta = m^nu`, when the
    /// scenario was built from them.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    /// Required `sigma_r(Theta) >= c_sigma sigma_1(Theta)`.
    #[serde(default = "default_c_sigma")]
    pub c_sigma: f64,
    /// Required `n_max <= balance^2 n_min`.
    #[serde(default = "default_balance")]
    pub balance: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_c_sigma() -> f64 {
    0.25
}

fn default_balance() -> f64 {
    1.5
}

impl GaussianScenario {
    pub fn new(n: usize, m: usize, r: usize, theta: f64, sigma: f64, seed: u64) -> Self {
        GaussianScenario {
            n,
            m,
            r,
            theta,
            sigma,
            gamma: None,
            nu: None,
            c_sigma: default_c_sigma(),
            balance: default_balance(),
            seed,
        }
    }

    /// `n = round(m^gamma)` and `sigma = theta m^nu`.
    pub fn from_regime(m: usize, gamma: f64, nu: f64, r: usize, theta: f64, seed: u64) -> Self {
        let mf = m as f64;
        let n = mf.powf(gamma).round() as usize;
        GaussianScenario { gamma: Some(gamma), nu: Some(nu), ..Self::new(n, m, r, theta, theta * mf.powf(nu), seed) }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.r == 0 || self.r >= self.n.min(self.m) {
            problems.push(format!("need 1 <= r < min(n, m), got r={} n={} m={}", self.r, self.n, self.m));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            problems.push(format!("theta must be positive, got {}", self.theta));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            problems.push(format!("sigma must be nonnegative, got {}", self.sigma));
        }
        if !(self.c_sigma > 0.0 && self.c_sigma <= 1.0) {
            problems.push(format!("c_sigma must lie in (0, 1], got {}", self.c_sigma));
        }
        if !(self.balance >= 1.0) {
            problems.push(format!("balance must be >= 1, got {}", self.balance));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(problems.join("; ")))
        }
    }
}

#[derive(Clone, Debug)]
pub struct GaussianInstance {
    pub x: DenseMatrix,
    pub xhat: DenseMatrix,
    pub model: ClusterModel,
    /// Left singular vectors of `X`, equal rows within clusters.
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    /// The `r` nonzero singular values of `X`, descending.
    pub d: Vec<f64>,
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

fn rescale_rows(m: &mut DMatrix<f64>, norm: f64) {
    for mut row in m.row_iter_mut() {
        let current = row.norm();
        if current > 0.0 {
            row *= norm / current;
        }
    }
}

/// `r x m` mean matrix with rows of norm `sqrt(m) theta`, blended toward
/// orthogonal rows until conditioned.
fn draw_theta(rng: &mut Rng, s: &GaussianScenario) -> Result<DMatrix<f64>> {
    let row_norm = (s.m as f64).sqrt() * s.theta;
    for _ in 0..MAX_RETRIES {
        let mut raw = gaussian_matrix(rng, s.r, s.m, 1.0).into_nalgebra();
        rescale_rows(&mut raw, row_norm);
        let mut orth = raw.transpose().qr().q().transpose();
        rescale_rows(&mut orth, row_norm);
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mut blend = &raw * (1.0 - t) + &orth * t;
            rescale_rows(&mut blend, row_norm);
            if condition(&blend) >= s.c_sigma {
                return Ok(blend);
            }
        }
    }
    Err(Error::Generation(format!("could not draw a mean matrix with condition >= {}", s.c_sigma)))
}

/// Draws labels, means and noise from `scenario.seed`.
pub fn gen_gaussian_mixture(s: &GaussianScenario) -> Result<GaussianInstance> {
    s.validate()?;
    let z = balanced_labels(&mut child_rng(s.seed, 0), s.n, s.r);
    let model_probe = ClusterModel::new(z.clone(), s.r, None)?;
    if model_probe.balance() > s.balance {
        return Err(Error::Generation(format!(
            "cluster sizes {:?} violate balance {}",
            model_probe.sizes(),
            s.balance
        )));
    }
    let theta = draw_theta(&mut child_rng(s.seed, 1), s)?;
    let model = ClusterModel::new(z, s.r, Some(DenseMatrix::from_nalgebra(theta.clone())?))?;

    // X = U_z sqrt(D_z) Theta, and the SVD of sqrt(D_z) Theta gives U = U_z U_Theta
    let sqrt_sizes = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        s.r,
        model.sizes().iter().map(|&c| (c as f64).sqrt()),
    ));
    let svd = (sqrt_sizes * &theta).svd(true, true);
    let mut order: Vec<usize> = (0..s.r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let u_theta = DMatrix::from_fn(s.r, s.r, |i, j| svd.u.as_ref().unwrap()[(i, order[j])]);
    let v_t = svd.v_t.as_ref().unwrap();
    let v = DMatrix::from_fn(s.m, s.r, |i, j| v_t[(order[j], i)]);
    let d: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();

    let zmat = model.membership();
    let x = zmat.matmul(&DenseMatrix::from_nalgebra(theta)?)?;
    let u = DenseMatrix::from_nalgebra(model.normalized_membership().as_nalgebra() * u_theta)?;
    let noise = gaussian_matrix(&mut child_rng(s.seed, 2), s.n, s.m, s.sigma);
    let xhat = x.add(&noise)?;
    Ok(GaussianInstance { x, xhat, model, u, v: DenseMatrix::from_nalgebra(v)?, d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthonormality_defect, spectral_norm, svd_r};

    #[test]
    fn truth_factorization_is_exact() {
        let s = GaussianScenario::new(60, 40, 3, 1.0, 0.5, 4);
        let g = gen_gaussian_mixture(&s).unwrap();
        assert!(orthonormality_defect(&g.u) < 1e-12 && orthonormality_defect(&g.v) < 1e-12);
        let d = DenseMatrix::from_diagonal(&g.d).unwrap();
        let rebuilt = g.u.matmul(&d).unwrap().matmul(&g.v.transpose()).unwrap();
        let err = spectral_norm(&g.x.sub(&rebuilt).unwrap()).unwrap();
        assert!(err <= 1e-8 * spectral_norm(&g.x).unwrap());
        let svd = svd_r(&g.x, 3).unwrap();
        for (a, b) in svd.spectrum().iter().zip(&g.d) {
            assert!((a - b).abs() < 1e-9 * b);
        }
        // equal rows of U within a cluster
        let z = g.model.labels();
        for i in 0..60 {
            for j in 0..60 {
                if z[i] == z[j] {
                    assert!(g.u.row(i).iter().zip(g.u.row(j)).all(|(a, b)| (a - b).abs() < 1e-12));
                }
            }
        }
    }

    #[test]
    fn theta_rows_and_conditioning() {
        let s = GaussianScenario { c_sigma: 0.9, ..GaussianScenario::new(30, 20, 3, 2.0, 0.0, 1) };
        let g = gen_gaussian_mixture(&s).unwrap();
        let theta = g.model.means().unwrap().as_nalgebra();
        for row in theta.row_iter() {
            assert!((row.norm() - 20f64.sqrt() * 2.0).abs() < 1e-10);
        }
        assert!(condition(theta) >= 0.9);
        assert_eq!(g.x, g.xhat);
    }

    #[test]
    fn deterministic_per_seed() {
        let s = GaussianScenario::new(20, 10, 2, 1.0, 1.0, 77);
        let a = gen_gaussian_mixture(&s).unwrap();
        let b = gen_gaussian_mixture(&s).unwrap();
        assert_eq!(a.xhat, b.xhat);
        let c = gen_gaussian_mixture(&GaussianScenario { seed: 78, ..s }).unwrap();
        assert_ne!(a.xhat, c.xhat);
    }

    #[test]
    fn regime_constructor_and_validation() {
        let s = GaussianScenario::from_regime(100, 0.5, 0.25, 2, 1.0, 0);
        assert_eq!(s.n, 10);
        assert!((s.sigma - 100f64.powf(0.25)).abs() < 1e-12);
        assert!(GaussianScenario::new(10, 10, 10, 1.0, 1.0, 0).validate().is_err());
        assert!(GaussianScenario::new(10, 10, 2, -1.0, 1.0, 0).validate().is_err());
    }
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    leading_eigs, one_inf_norm, spectral_norm, svd_r, two_inf_norm, DenseMatrix, SpectralPair,
};
use crate::{Error, Result};

/// Normalized errors of a symmetric perturbation `Yhat = Y + E`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymErrorProfile {
    pub rank: usize,
    /// `||E|| / |lambda_r|`
    pub delta0: f64,
    /// `||E||_{1,inf} / |lambda_r|`
    pub delta1_inf: f64,
    /// `||E||_{2,inf} / |lambda_r|`
    pub delta2_inf: f64,
    /// `||E U||_{2,inf} / |lambda_r|`
    pub delta_eu: f64,
    /// `||U||_{2,inf}`
    pub eps_u: f64,
    pub lam_r: f64,
    pub lam_r1: f64,
    /// Relative gap `(lambda_r - lambda_(r+1)) / |lambda_r|`.
    pub c_lam: f64,
}

impl SymErrorProfile {
    pub fn tail_ratio(&self) -> f64 {
        self.lam_r1.abs() / self.lam_r.abs()
    }
}

fn nonzero_scale(value: f64, scale: f64, what: &str) -> Result<()> {
    if value.abs() <= 1e3 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateSpectrum(format!("{what} = {value:e} is numerically zero")));
    }
    Ok(())
}

pub fn sym_error_profile(y: &DenseMatrix, yhat: &DenseMatrix, r: usize) -> Result<SymErrorProfile> {
    if y.shape() != yhat.shape() {
        return Err(Error::dim(format!("Y is {:?} but Yhat is {:?}", y.shape(), yhat.shape())));
    }
    crate::linalg::check_symmetric(yhat)?;
    let pair = leading_eigs(y, r)?;
    sym_error_profile_with(&pair, &yhat.sub(y)?)
}

/// Profile from a precomputed decomposition of `Y` and the error `E`.
pub fn sym_error_profile_with(pair: &SpectralPair, e: &DenseMatrix) -> Result<SymErrorProfile> {
    let u = pair.basis();
    if e.shape() != (u.rows(), u.rows()) {
        return Err(Error::dim(format!("error is {:?}, basis has {} rows", e.shape(), u.rows())));
    }
    let lam_r = pair.last_value();
    let lam_1 = pair.spectrum().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    nonzero_scale(lam_r, lam_1, "lambda_r")?;
    let scale = lam_r.abs();
    Ok(SymErrorProfile {
        rank: pair.rank(),
        delta0: spectral_norm(e)? / scale,
        delta1_inf: one_inf_norm(e)? / scale,
        delta2_inf: two_inf_norm(e)? / scale,
        delta_eu: two_inf_norm(&e.matmul(u)?)? / scale,
        eps_u: two_inf_norm(u)?,
        lam_r,
        lam_r1: pair.next_value(),
        c_lam: (lam_r - pair.next_value()) / scale,
    })
}

/// Normalized errors of a rectangular perturbation `Xhat = X + Xi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonsymErrorProfile {
    pub rank: usize,
    /// `||Xi|| / d_r`
    pub t_delta0: f64,
    /// `||Xi||_{q,inf} / d_r`
    pub t_delta_1inf: f64,
    pub t_delta_2inf: f64,
    /// `||Xi^T||_{q,inf} / d_r`
    pub t_delta_1inf_t: f64,
    pub t_delta_2inf_t: f64,
    /// `||Xi V||_{q,inf} / d_r`
    pub t_delta_v_1inf: f64,
    pub t_delta_v_2inf: f64,
    /// `||U^T Xi|| / d_r`
    pub t_delta_u0: f64,
    /// `||Xi V|| / d_r`
    pub t_delta0_v: f64,
    /// `||U^T Xi V|| / d_r`
    pub t_delta_uv0: f64,
    pub d_r: f64,
    pub d_r1: f64,
    pub eps_u: f64,
    pub eps_v: f64,
}

impl NonsymErrorProfile {
    pub fn tail_ratio(&self) -> f64 {
        self.d_r1 / self.d_r
    }
}

pub fn nonsym_error_profile(x: &DenseMatrix, xhat: &DenseMatrix, r: usize) -> Result<NonsymErrorProfile> {
    if x.shape() != xhat.shape() {
        return Err(Error::dim(format!("X is {:?} but Xhat is {:?}", x.shape(), xhat.shape())));
    }
    let pair = svd_r(x, r)?;
    nonsym_error_profile_with(&pair, &xhat.sub(x)?)
}

/// Profile from a precomputed SVD of `X` and the error `Xi`.
pub fn nonsym_error_profile_with(pair: &SpectralPair, xi: &DenseMatrix) -> Result<NonsymErrorProfile> {
    let u = pair.basis();
    let v = pair
        .co_basis()
        .ok_or_else(|| Error::dim("rectangular profile needs singular triplets"))?;
    if xi.shape() != (u.rows(), v.rows()) {
        return Err(Error::dim(format!("error is {:?}, factors are {}x{}", xi.shape(), u.rows(), v.rows())));
    }
    let d_r = pair.last_value();
    nonzero_scale(d_r, pair.spectrum()[0], "d_r")?;
    let xi_t = xi.transpose();
    let xi_v = xi.matmul(v)?;
    let ut_xi = u.transpose().matmul(xi)?;
    let ut_xi_v = ut_xi.matmul(v)?;
    Ok(NonsymErrorProfile {
        rank: pair.rank(),
        t_delta0: spectral_norm(xi)? / d_r,
        t_delta_1inf: one_inf_norm(xi)? / d_r,
        t_delta_2inf: two_inf_norm(xi)? / d_r,
        t_delta_1inf_t: one_inf_norm(&xi_t)? / d_r,
        t_delta_2inf_t: two_inf_norm(&xi_t)? / d_r,
        t_delta_v_1inf: one_inf_norm(&xi_v)? / d_r,
        t_delta_v_2inf: two_inf_norm(&xi_v)? / d_r,
        t_delta_u0: spectral_norm(&ut_xi)? / d_r,
        t_delta0_v: spectral_norm(&xi_v)? / d_r,
        t_delta_uv0: spectral_norm(&ut_xi_v)? / d_r,
        d_r,
        d_r1: pair.next_value(),
        eps_u: two_inf_norm(u)?,
        eps_v: two_inf_norm(v)?,
    })
}

/// `H(Xhat Xhat^T)` when `hollow`, else `Xhat Xhat^T`.
pub fn symmetrize_estimate(xhat: &DenseMatrix, hollow: bool) -> DenseMatrix {
    let mut g = xhat.as_nalgebra() * xhat.as_nalgebra().transpose();
    // exact symmetry: the product is computed entry by entry twice
    g = (&g + g.transpose()) * 0.5;
    if hollow {
        g.fill_diagonal(0.0);
    }
    DenseMatrix::wrap(g)
}

/// Use the hollowed estimator iff `sigma^2 > d^2 / m` (strict).
pub fn hollow_decision(sigma_sq: f64, d_sq: f64, m: usize) -> Result<bool> {
    if !(sigma_sq > 0.0 && d_sq > 0.0 && m > 0) || !sigma_sq.is_finite() || !d_sq.is_finite() {
        return Err(Error::Domain(format!(
            "hollowing rule needs positive inputs, got sigma^2={sigma_sq}, d^2={d_sq}, m={m}"
        )));
    }
    Ok(sigma_sq > d_sq / m as f64)
}

/// The four pieces of `Yhat - X X^T` for the symmetrized estimator.
#[derive(Clone, Debug)]
pub struct ErrorSplit {
    /// Noise Gram part, hollowed when the estimator is.
    pub xi_xi: DenseMatrix,
    /// `Xi X^T`
    pub xi_x: DenseMatrix,
    /// `X Xi^T`
    pub x_xi: DenseMatrix,
    /// Diagonal correction, zero without hollowing.
    pub diag: DenseMatrix,
}

impl ErrorSplit {
    pub fn total(&self) -> DenseMatrix {
        let m = self.xi_xi.as_nalgebra() + self.xi_x.as_nalgebra() + self.x_xi.as_nalgebra() + self.diag.as_nalgebra();
        DenseMatrix::wrap(m)
    }
}

pub fn error_split(x: &DenseMatrix, xhat: &DenseMatrix, hollow_flag: bool) -> Result<ErrorSplit> {
    if x.shape() != xhat.shape() {
        return Err(Error::dim(format!("X is {:?} but Xhat is {:?}", x.shape(), xhat.shape())));
    }
    let xm = x.as_nalgebra();
    let xi = xhat.as_nalgebra() - xm;
    let n = x.rows();
    let mut xi_xi = &xi * xi.transpose();
    let xi_x = &xi * xm.transpose();
    let x_xi = xi_x.transpose();
    let mut diag = DMatrix::zeros(n, n);
    if hollow_flag {
        xi_xi.fill_diagonal(0.0);
        for i in 0..n {
            let yii = xm.row(i).norm_squared();
            diag[(i, i)] = -(yii + 2.0 * xi_x[(i, i)]);
        }
    }
    Ok(ErrorSplit {
        xi_xi: DenseMatrix::wrap(xi_xi),
        xi_x: DenseMatrix::wrap(xi_x),
        x_xi: DenseMatrix::wrap(x_xi),
        diag: DenseMatrix::wrap(diag),
    })
}

/// Normalized errors of the symmetrized estimator `Yhat` of `Y = X X^T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedProfile {
    pub rank: usize,
    pub hollow: bool,
    /// `||XiXi|| / d_r^2` for the (possibly hollowed) noise Gram part.
    pub t_delta_xixi0: f64,
    /// `||E|| / d_r^2`
    pub t_delta_e0: f64,
    /// `||E U|| / d_r^2`
    pub t_delta_eu0: f64,
    /// `||XiXi U||_{2,inf} / d_r^2`
    pub t_delta_xixiu_2inf: f64,
    /// `||Xi X^T||_{q,inf} / d_r^2`
    pub t_delta_xix_1inf: f64,
    pub t_delta_xix_2inf: f64,
    /// `||Xi X^T U||_{2,inf} / d_r^2`
    pub t_delta_xixu_2inf: f64,
    /// `||XiXi + Xi X^T||_{2,inf} / d_r^2`
    pub t_delta_e_2inf: f64,
    /// `max_i Y(i,i) / d_r^2`
    pub eps_y: f64,
    /// `min(t_delta_e0, sqrt(r) t_delta_eu0)`
    pub t_delta_uu0: f64,
    pub d_r: f64,
}

impl SymmetrizedProfile {
    pub fn hollow_indicator(&self) -> f64 {
        if self.hollow {
            1.0
        } else {
            0.0
        }
    }
}

pub fn symmetrized_profile(x: &DenseMatrix, xhat: &DenseMatrix, r: usize, hollow_flag: bool) -> Result<SymmetrizedProfile> {
    let pair = svd_r(x, r)?;
    let split = error_split(x, xhat, hollow_flag)?;
    symmetrized_profile_with(&pair, x, &split, hollow_flag)
}

/// Profile from a precomputed SVD of `X` and error split.
pub fn symmetrized_profile_with(
    pair: &SpectralPair,
    x: &DenseMatrix,
    split: &ErrorSplit,
    hollow_flag: bool,
) -> Result<SymmetrizedProfile> {
    let d_r = pair.last_value();
    nonzero_scale(d_r, pair.spectrum()[0], "d_r")?;
    let s = d_r * d_r;
    let u = pair.basis();
    let e = split.total();
    let eu = e.matmul(u)?;
    let r = pair.rank();
    let t_delta_e0 = spectral_norm(&e)? / s;
    let t_delta_eu0 = spectral_norm(&eu)? / s;
    let e12 = split.xi_xi.add(&split.xi_x)?;
    let max_diag = (0..x.rows())
        .map(|i| x.as_nalgebra().row(i).norm_squared())
        .fold(0.0, f64::max);
    Ok(SymmetrizedProfile {
        rank: r,
        hollow: hollow_flag,
        t_delta_xixi0: spectral_norm(&split.xi_xi)? / s,
        t_delta_e0,
        t_delta_eu0,
        t_delta_xixiu_2inf: two_inf_norm(&split.xi_xi.matmul(u)?)? / s,
        t_delta_xix_1inf: one_inf_norm(&split.xi_x)? / s,
        t_delta_xix_2inf: two_inf_norm(&split.xi_x)? / s,
        t_delta_xixu_2inf: two_inf_norm(&split.xi_x.matmul(u)?)? / s,
        t_delta_e_2inf: two_inf_norm(&e12)? / s,
        eps_y: max_diag / s,
        t_delta_uu0: t_delta_e0.min((r as f64).sqrt() * t_delta_eu0),
        d_r,
    })
}

/// Coarse constant-free estimate of `t_delta_e0` from other quantities.
/// Not exact, and never used inside bound evaluation.
pub fn t_delta_e0_estimate(p: &SymmetrizedProfile, np: &NonsymErrorProfile) -> f64 {
    p.t_delta_xixi0 + np.t_delta0_v + np.tail_ratio() * np.t_delta0 + p.hollow_indicator() * p.eps_y
}

/// Coarse estimate `eps_U * t_delta_xix_1inf` of `t_delta_xix_2inf`.
pub fn t_delta_xix_2inf_estimate(p: &SymmetrizedProfile, np: &NonsymErrorProfile) -> f64 {
    np.eps_u * p.t_delta_xix_1inf
}

//! Analytic error-rate surrogates with every asymptotic constant set to 1.

use serde::{Deserialize, Serialize};

use super::AssumptionKnobs;
use crate::{Error, Result};

/// Rates for a rank-`r` mixture observed with iid `N(0, sigma^2)` noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianRates {
    pub eps0: f64,
    pub eps_2inf: f64,
    pub eps_v_2inf: f64,
    pub eps_y: f64,
    pub eps_xixiu_2inf: f64,
    pub eps_e0: f64,
    pub eps_xixu_2inf: f64,
    pub eps_e_2inf: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Regularity conditions that look violated at these sizes.
    pub warnings: Vec<String>,
}

impl GaussianRates {
    /// Row-concentration knobs for the rectangular-noise bounds.
    pub fn knobs(&self, generic_constant: f64) -> AssumptionKnobs {
        AssumptionKnobs { t_eps1: self.eps1, t_eps2: self.eps2, generic_constant, ..Default::default() }
    }
}

/// `tau` only affects the unspecified constant and is accepted for
/// completeness.
pub fn gaussian_rate_profile(n: usize, m: usize, r: usize, sigma: f64, theta: f64, _tau: f64) -> Result<GaussianRates> {
    if n < 2 || m == 0 || r == 0 || !(sigma >= 0.0) || !(theta > 0.0) {
        return Err(Error::Domain(format!(
            "rates need n >= 2, m, r >= 1, sigma >= 0, theta > 0 (got n={n}, m={m}, r={r}, sigma={sigma}, theta={theta})"
        )));
    }
    let (nf, mf, rf) = (n as f64, m as f64, r as f64);
    let log_n = nf.ln();
    let s = sigma * rf.sqrt() / theta;
    let s2 = s * s;
    let root_mn = (mf * nf).sqrt();
    let mut warnings = Vec::new();
    if mf.ln() > 4.0 * log_n {
        warnings.push(format!("log m = {:.2} is large relative to log n = {:.2}", mf.ln(), log_n));
    }
    if rf * rf >= nf.min(mf) {
        warnings.push(format!("r^2 = {} is not small relative to min(n, m) = {}", r * r, n.min(m)));
    }
    Ok(GaussianRates {
        eps0: s * (1.0 / mf.sqrt() + 1.0 / nf.sqrt()),
        eps_2inf: s * log_n.sqrt() / nf.sqrt(),
        eps_v_2inf: s * (rf * log_n).sqrt() / root_mn,
        eps_y: rf / nf,
        eps_xixiu_2inf: s2 * log_n * rf.sqrt() / (nf * mf.sqrt()),
        eps_e0: s2 * log_n / mf + rf / nf,
        eps_xixu_2inf: s * log_n * rf.sqrt() / root_mn,
        eps_e_2inf: s2 * log_n / root_mn + s * (rf * log_n).sqrt() / root_mn,
        eps1: s * log_n.sqrt() / root_mn,
        eps2: 0.0,
        warnings,
    })
}

/// Row-concentration knobs for noise with entry variance at most `v` and
/// entries bounded by `h`: `(sqrt(v log n) / d_r, h log n / d_r)`.
pub fn bernstein_knobs(d_r: f64, v: f64, h: f64, n: usize) -> Result<(f64, f64)> {
    if !(d_r > 0.0 && v >= 0.0 && h >= 0.0) || n < 2 {
        return Err(Error::Domain(format!("bad Bernstein inputs d_r={d_r}, v={v}, h={h}, n={n}")));
    }
    let log_n = (n as f64).ln();
    Ok(((v * log_n).sqrt() / d_r, h * log_n / d_r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_unit_ratio() {
        for n in [16usize, 100, 400] {
            let g = gaussian_rate_profile(n, n, 1, 2.0, 2.0, 1.0).unwrap();
            assert!((g.eps0 - 2.0 / (n as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn documented_values() {
        let g = gaussian_rate_profile(100, 50, 2, 1.0, 1.0, 1.0).unwrap();
        assert!((g.eps_y - 0.02).abs() < 1e-15);
        assert_eq!(g.eps2, 0.0);
        let knobs = g.knobs(3.0);
        assert_eq!((knobs.t_eps1, knobs.t_eps2, knobs.generic_constant), (g.eps1, 0.0, 3.0));
    }

    #[test]
    fn rates_shrink_with_n() {
        let a = gaussian_rate_profile(200, 200, 2, 1.0, 1.0, 1.0).unwrap();
        let b = gaussian_rate_profile(2000, 2000, 2, 1.0, 1.0, 1.0).unwrap();
        assert!(b.eps0 < a.eps0 && b.eps_e0 < a.eps_e0 && b.eps1 < a.eps1);
    }

    #[test]
    fn warnings_and_domain() {
        assert!(gaussian_rate_profile(4, 4, 2, 1.0, 1.0, 1.0).unwrap().warnings.len() == 1);
        assert!(gaussian_rate_profile(10, 100_000, 1, 1.0, 1.0, 1.0).unwrap().warnings.len() == 1);
        assert!(gaussian_rate_profile(10, 10, 1, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn bernstein_form() {
        let (e1, e2) = bernstein_knobs(2.0, 0.25, 1.0, 100).unwrap();
        let l = 100f64.ln();
        assert!((e1 - (0.25 * l).sqrt() / 2.0).abs() < 1e-15);
        assert!((e2 - l / 2.0).abs() < 1e-15);
        assert!(bernstein_knobs(0.0, 1.0, 1.0, 10).is_err());
    }
}

//! Bound evaluators. Each returns a [`BoundReport`] whose value is the sum
//! of its labelled terms; bounds with an unspecified leading constant are
//! scaled by [`AssumptionKnobs::generic_constant`].

use super::{AssumptionKnobs, BoundId, BoundReport, NonsymErrorProfile, SymErrorProfile, SymmetrizedProfile};
use crate::linalg::SinThetaFlavor;
use crate::{Error, Result};

/// Relative tolerance for "this eigen/singular value is zero".
const ZERO_TAIL_TOL: f64 = 1e-10;

fn below_one(report: &mut BoundReport, name: &str, value: f64) {
    report.require(value < 1.0, format!("{name} = {value:.4e} (< 1 required)"));
}

/// `2 ||E|| / (lambda_r - lambda_(r+1))`, bounding the sin-theta distance in
/// the norm `err_norm` was measured in.
pub fn davis_kahan_bound(p: &SymErrorProfile, flavor: SinThetaFlavor, err_norm: f64) -> Result<BoundReport> {
    let gap = p.lam_r - p.lam_r1;
    if !(gap > 0.0) {
        return Err(Error::NoGap { lam_r: p.lam_r, lam_next: p.lam_r1 });
    }
    if !(err_norm >= 0.0) {
        return Err(Error::Domain(format!("error norm must be nonnegative, got {err_norm}")));
    }
    let mut report = BoundReport::from_terms(BoundId::DavisKahan, vec![("twice_error_over_gap", 2.0 * err_norm / gap)]);
    report.notes.push(format!("{flavor:?} norm").to_lowercase());
    Ok(report)
}

/// Two-to-infinity bound for symmetric perturbations with explicit constants;
/// needs `delta0 <= 1/4`.
pub fn sym_two_inf_bound(p: &SymErrorProfile) -> Result<BoundReport> {
    let c = p.c_lam;
    if !(c > 0.0) {
        return Err(Error::NoGap { lam_r: p.lam_r, lam_next: p.lam_r1 });
    }
    let d0 = p.delta0;
    let lead = 4.0 / 3.0 + 2.0 / (3.0 * c) + 1.0 / (c * c);
    let mut report = BoundReport::from_terms(
        BoundId::SymTwoInf,
        vec![
            ("eps_u_delta0", lead * d0 * p.eps_u),
            ("delta0_rows_and_tail", 8.0 * d0 / (3.0 * c) * (p.delta2_inf + p.tail_ratio())),
            ("delta_eu", 4.0 / 3.0 * p.delta_eu),
        ],
    );
    report.require(d0 <= 0.25, format!("delta0 = {d0:.4e} (<= 1/4 required)"));
    Ok(report)
}

/// `7 eps_U delta_{1,inf}` for exactly rank-`r` `Y`.
pub fn rank_r_sym_bound(p: &SymErrorProfile) -> Result<BoundReport> {
    if p.lam_r1.abs() > ZERO_TAIL_TOL * p.lam_r.abs().max(1.0) {
        return Err(Error::NotApplicable(format!(
            "rank-r bound needs lambda_(r+1) = 0, got {:e}",
            p.lam_r1
        )));
    }
    let mut report = BoundReport::from_terms(BoundId::RankR, vec![("seven_eps_u_delta1_inf", 7.0 * p.eps_u * p.delta1_inf)]);
    report.require(p.delta0 <= 0.25, format!("delta0 = {:.4e} (<= 1/4 required)", p.delta0));
    Ok(report)
}

/// Refined symmetric bound under row-wise concentration of the noise;
/// constant-free.
pub fn sym_refined_bound(p: &SymErrorProfile, k: &AssumptionKnobs, r: usize) -> Result<BoundReport> {
    k.validate()?;
    let c = k.generic_constant;
    let e0 = p.delta0;
    let mut report = BoundReport::from_terms(
        BoundId::SymRefined,
        vec![
            ("eps0_eps_u", c * e0 * p.eps_u),
            ("eps0_eps1_sqrt_r", c * e0 * k.eps1 * (r as f64).sqrt()),
            ("eps_eu", c * p.delta_eu),
            ("tail_ratio_eps0", c * p.tail_ratio() * e0),
        ],
    );
    below_one(&mut report, "eps0", e0);
    below_one(&mut report, "eps1", k.eps1);
    below_one(&mut report, "eps2", k.eps2);
    Ok(report)
}

/// Two-to-infinity bound for the left singular subspace; constant-free,
/// needs `t_delta0 <= 1/4`.
pub fn nonsym_two_inf_bound(p: &NonsymErrorProfile, k: &AssumptionKnobs) -> Result<BoundReport> {
    k.validate()?;
    let c = k.generic_constant;
    let d0 = p.t_delta0;
    let mut report = BoundReport::from_terms(
        BoundId::Nonsym,
        vec![
            ("eps_u_uv_and_square", c * p.eps_u * (p.t_delta_uv0 + d0 * d0)),
            ("v_two_inf", c * p.t_delta_v_2inf),
            ("delta0_rows_and_tail", c * d0 * (p.t_delta_2inf + p.tail_ratio())),
        ],
    );
    report.require(d0 <= 0.25, format!("t_delta0 = {d0:.4e} (<= 1/4 required)"));
    report.require(p.d_r > p.d_r1, format!("d_r = {:.4e}, d_(r+1) = {:.4e} (gap required)", p.d_r, p.d_r1));
    Ok(report)
}

/// Bound for the leading eigenvectors of the symmetrized estimator;
/// constant-free.
pub fn symmetrized_two_inf_bound(
    p: &SymmetrizedProfile,
    np: &NonsymErrorProfile,
    k: &AssumptionKnobs,
) -> Result<BoundReport> {
    k.validate()?;
    let c = k.generic_constant;
    let h = p.hollow_indicator();
    let tail = np.tail_ratio();
    let mut report = BoundReport::from_terms(
        BoundId::Symmetrized,
        vec![
            ("xixi_u", c * p.t_delta_xixiu_2inf),
            ("xix_u", c * p.t_delta_xixu_2inf),
            ("uu0_cross", c * p.t_delta_uu0 * (np.eps_u + p.t_delta_e_2inf)),
            ("tail_group", c * tail * (np.t_delta_u0 + p.t_delta_e0 * np.t_delta0 + tail * p.t_delta_e0)),
            ("hollow_diag", c * h * p.eps_y * (np.eps_u + p.t_delta_e0)),
        ],
    );
    report.require(h * p.eps_y <= 0.25, format!("h * eps_y = {:.4e} (<= 1/4 required)", h * p.eps_y));
    report.require(p.t_delta_e0 <= 0.5, format!("t_delta_e0 = {:.4e} (<= 1/2 required)", p.t_delta_e0));
    Ok(report)
}

/// Refined bound for the symmetrized estimator under row-wise concentration
/// of the noise; needs `X` of exact rank `r`. Constant-free.
pub fn symmetrized_refined_bound(
    p: &SymmetrizedProfile,
    np: &NonsymErrorProfile,
    k: &AssumptionKnobs,
    r: usize,
) -> Result<BoundReport> {
    k.validate()?;
    if np.d_r1.abs() > ZERO_TAIL_TOL * np.d_r.abs() {
        return Err(Error::NotApplicable(format!(
            "refined symmetrized bound needs d_(r+1) = 0, got {:e}",
            np.d_r1
        )));
    }
    let c = k.generic_constant;
    let h = p.hollow_indicator();
    let row_knob = (r as f64).sqrt() * k.t_eps1 * (np.t_delta0 + 1.0);
    let col_knob = k.t_eps2 * (np.t_delta_2inf_t + np.eps_v);
    let diag_or_row = h * p.eps_y + (1.0 - h) * np.t_delta_2inf * np.t_delta_2inf;
    let delta1_u = p.t_delta_uu0
        + p.t_delta_e0 * (p.t_delta_e0 + k.t_eps1 * (np.t_delta0 + 1.0) + col_knob);
    let mut report = BoundReport::from_terms(
        BoundId::SymmetrizedRefined,
        vec![
            ("xixi_u", c * p.t_delta_xixiu_2inf),
            ("xix_u", c * p.t_delta_xixu_2inf),
            ("uu0_knobs", c * p.t_delta_uu0 * (row_knob + col_knob)),
            ("diag_or_row_sq", c * diag_or_row),
            ("eps_u_delta1_u", c * np.eps_u * delta1_u),
        ],
    );
    report.require(h * p.eps_y <= 0.25, format!("h * eps_y = {:.4e} (<= 1/4 required)", h * p.eps_y));
    report.require(p.t_delta_e0 <= 0.5, format!("t_delta_e0 = {:.4e} (<= 1/2 required)", p.t_delta_e0));
    below_one(&mut report, "t_delta_e0", p.t_delta_e0);
    below_one(&mut report, "sqrt(r) t_eps1 (t_delta0 + 1)", row_knob);
    below_one(&mut report, "t_eps2 (t_delta_2inf^T + eps_v)", col_knob);
    below_one(&mut report, "(1 - h) t_delta_2inf", (1.0 - h) * np.t_delta_2inf);
    Ok(report)
}

//! Error profiles of a perturbed matrix and the upper bounds they feed.
//!
//! A profile collects every normalized error quantity a bound needs; the
//! evaluators in [`formulas`] are plain arithmetic on profiles so they can
//! equally be fed analytic surrogates (see [`rates`]).

pub mod formulas;
mod profiles;
pub mod rates;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use profiles::{
    error_split, hollow_decision, nonsym_error_profile, nonsym_error_profile_with, sym_error_profile,
    sym_error_profile_with, symmetrize_estimate, symmetrized_profile, symmetrized_profile_with, t_delta_e0_estimate,
    t_delta_xix_2inf_estimate, ErrorSplit,
    NonsymErrorProfile, SymErrorProfile, SymmetrizedProfile,
};
pub use rates::{bernstein_knobs, gaussian_rate_profile, GaussianRates};
pub use formulas::{
    davis_kahan_bound, nonsym_two_inf_bound, rank_r_sym_bound, sym_refined_bound, sym_two_inf_bound,
    symmetrized_refined_bound, symmetrized_two_inf_bound,
};

use crate::{Error, Result};

/// Distributional error-rate inputs supplied by the caller, plus the stand-in
/// for the unspecified leading constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionKnobs {
    /// Row-wise concentration rates for symmetric noise.
    pub eps1: f64,
    pub eps2: f64,
    /// Row-wise concentration rates for rectangular noise.
    pub t_eps1: f64,
    pub t_eps2: f64,
    pub generic_constant: f64,
}

impl Default for AssumptionKnobs {
    fn default() -> Self {
        AssumptionKnobs { eps1: 0.0, eps2: 0.0, t_eps1: 0.0, t_eps2: 0.0, generic_constant: 1.0 }
    }
}

impl AssumptionKnobs {
    pub fn validate(&self) -> Result<()> {
        let all = [self.eps1, self.eps2, self.t_eps1, self.t_eps2];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!("knobs must be finite and nonnegative: {self:?}")));
        }
        if !(self.generic_constant.is_finite() && self.generic_constant > 0.0) {
            return Err(Error::Domain(format!("generic constant must be positive, got {}", self.generic_constant)));
        }
        Ok(())
    }
}

/// Which bound a report came from. The short names double as CSV keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundId {
    #[serde(rename = "dk")]
    DavisKahan,
    #[serde(rename = "thm2")]
    SymTwoInf,
    #[serde(rename = "rankR")]
    RankR,
    #[serde(rename = "thm3")]
    SymRefined,
    #[serde(rename = "thm4")]
    Nonsym,
    #[serde(rename = "thm5")]
    Symmetrized,
    #[serde(rename = "thm6")]
    SymmetrizedRefined,
}

impl BoundId {
    pub const ALL: [BoundId; 7] = [
        BoundId::DavisKahan,
        BoundId::SymTwoInf,
        BoundId::RankR,
        BoundId::SymRefined,
        BoundId::Nonsym,
        BoundId::Symmetrized,
        BoundId::SymmetrizedRefined,
    ];

    pub fn key(self) -> &'static str {
        match self {
            BoundId::DavisKahan => "dk",
            BoundId::SymTwoInf => "thm2",
            BoundId::RankR => "rankR",
            BoundId::SymRefined => "thm3",
            BoundId::Nonsym => "thm4",
            BoundId::Symmetrized => "thm5",
            BoundId::SymmetrizedRefined => "thm6",
        }
    }

    /// Whether every constant in the bound is known.
    pub fn constant_explicit(self) -> bool {
        matches!(self, BoundId::DavisKahan | BoundId::SymTwoInf | BoundId::RankR)
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.key() == s)
            .ok_or_else(|| Error::Domain(format!("unknown bound '{s}' (expected one of dk, thm2, rankR, thm3, thm4, thm5, thm6)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTerm {
    pub label: &'static str,
    pub value: f64,
}

/// A bound value with its summands.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: BoundId,
    pub value: f64,
    pub terms: Vec<BoundTerm>,
    pub constant_explicit: bool,
    pub preconditions_met: bool,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub(crate) fn from_terms(bound: BoundId, terms: Vec<(&'static str, f64)>) -> Self {
        let terms: Vec<BoundTerm> = terms.into_iter().map(|(label, value)| BoundTerm { label, value }).collect();
        let value = terms.iter().map(|t| t.value).sum();
        BoundReport {
            bound,
            value,
            terms,
            constant_explicit: bound.constant_explicit(),
            preconditions_met: true,
            notes: Vec::new(),
        }
    }

    pub(crate) fn require(&mut self, ok: bool, note: String) {
        if !ok {
            self.preconditions_met = false;
        }
        self.notes.push(note);
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.label == label).map(|t| t.value)
    }

    pub fn notes_text(&self) -> String {
        self.notes.join("; ")
    }

    /// Flat `(key, value)` record; keys are `bound.<id>.<field>` and
    /// `bound.<id>.term.<label>`.
    pub fn record(&self) -> Vec<(String, String)> {
        let id = self.bound.key();
        let mut out = vec![
            (format!("bound.{id}.value"), fmt_f64(self.value)),
            (format!("bound.{id}.preconditions_met"), self.preconditions_met.to_string()),
            (format!("bound.{id}.constant_explicit"), self.constant_explicit.to_string()),
        ];
        for t in &self.terms {
            out.push((format!("bound.{id}.term.{}", t.label), fmt_f64(t.value)));
        }
        out.push((format!("bound.{id}.notes"), self.notes_text()));
        out
    }
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Term labels each bound emits, in order. Stable: used as CSV columns.
pub fn term_labels(bound: BoundId) -> &'static [&'static str] {
    match bound {
        BoundId::DavisKahan => &["twice_error_over_gap"],
        BoundId::SymTwoInf => &["eps_u_delta0", "delta0_rows_and_tail", "delta_eu"],
        BoundId::RankR => &["seven_eps_u_delta1_inf"],
        BoundId::SymRefined => &["eps0_eps_u", "eps0_eps1_sqrt_r", "eps_eu", "tail_ratio_eps0"],
        BoundId::Nonsym => &["eps_u_uv_and_square", "v_two_inf", "delta0_rows_and_tail"],
        BoundId::Symmetrized => &["xixi_u", "xix_u", "uu0_cross", "tail_group", "hollow_diag"],
        BoundId::SymmetrizedRefined => &["xixi_u", "xix_u", "uu0_knobs", "diag_or_row_sq", "eps_u_delta1_u"],
    }
}

//! Fitting the unspecified leading constant of a bound on one seed range
//! and checking it on another.

use twoinf_core::bounds::{fmt_f64, BoundId};
use twoinf_core::clustering::ClusteringMode;

use crate::config::{bound_applies, ExperimentConfig};
use crate::runner::{run_jobs, ReplicateRow, Scenario};
use crate::BenchError;

/// Quantile `q` of `values` as the `ceil((k + 1) q)`-th smallest of the
/// `k` values (capped at the largest). A fresh exchangeable value then
/// exceeds it with probability at most `1 - q`.
pub fn conformal_quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty() && q > 0.0 && q <= 1.0);
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    let rank = (((k + 1) as f64) * q).ceil() as usize;
    v[rank.clamp(1, k) - 1]
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum CalibrationError {
    #[error("bound {0} has explicit constants")]
    ExplicitConstant(BoundId),
    #[error("{0} usable calibration replicates, at least 50 needed")]
    TooFew(usize),
    #[error("replicate {replicate}: bound is 0 but the error is {error:e}")]
    ZeroBound { replicate: u64, error: f64 },
}

/// One `(replicate, empirical error, constant-free bound value)` triple.
pub type Sample = (u64, f64, f64);

/// Fitted constant: the `q` quantile of `error / bound` over the samples.
pub fn calibrate_constant(bound: BoundId, samples: &[Sample], q: f64) -> Result<f64, CalibrationError> {
    if bound.constant_explicit() {
        return Err(CalibrationError::ExplicitConstant(bound));
    }
    if samples.len() < 50 {
        return Err(CalibrationError::TooFew(samples.len()));
    }
    let mut ratios = Vec::with_capacity(samples.len());
    for &(replicate, error, value) in samples {
        if value > 0.0 {
            ratios.push(error / value);
        } else if error > 0.0 {
            return Err(CalibrationError::ZeroBound { replicate, error });
        } else {
            ratios.push(0.0);
        }
    }
    Ok(conformal_quantile(&ratios, q))
}

/// Samples whose error exceeds `constant * bound`.
pub fn count_violations(samples: &[Sample], constant: f64) -> usize {
    samples.iter().filter(|&&(_, e, v)| e > constant * v).count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRow {
    pub bound: BoundId,
    pub mode: ClusteringMode,
    pub calib_samples: usize,
    pub constant: Result<f64, CalibrationError>,
    pub valid_samples: usize,
    pub violations: usize,
    pub target: f64,
}

impl CalibrationRow {
    pub fn violation_fraction(&self) -> f64 {
        if self.valid_samples == 0 {
            0.0
        } else {
            self.violations as f64 / self.valid_samples as f64
        }
    }

    pub fn within_target(&self) -> bool {
        self.constant.is_ok() && self.valid_samples > 0 && self.violation_fraction() <= self.target
    }
}

/// Samples of one (bound, mode): replicates where both the error and the
/// bound were computed.
pub fn samples(rows: &[ReplicateRow], bound: BoundId, mode: ClusteringMode) -> Vec<Sample> {
    rows.iter()
        .filter(|r| r.mode == mode)
        .filter_map(|r| {
            let b = r.bound(bound)?;
            let value = b.report.as_ref().ok()?.value;
            Some((r.replicate, b.empirical?, value))
        })
        .collect()
}

fn seed_jobs((start, end): (u64, u64)) -> Vec<(u64, u64)> {
    (start..end).map(|s| (s, s)).collect()
}

/// Calibration runs use the seed itself as the instance seed, so seed
/// ranges are reproducible without a master seed.
pub fn run_calibration(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<CalibrationRow>, BenchError> {
    let scenario = Scenario::new(cfg)?;
    let calib = run_jobs(&scenario, &seed_jobs(cfg.calibration.calib_seeds), threads)?;
    let valid = run_jobs(&scenario, &seed_jobs(cfg.calibration.valid_seeds), threads)?;
    let gram = cfg.gram_observation();
    let mut out = Vec::new();
    for &bound in cfg.bounds.iter().filter(|b| !b.constant_explicit()) {
        for &mode in cfg.modes.iter().filter(|&&m| bound_applies(bound, m, gram)) {
            let cs = samples(&calib, bound, mode);
            let vs = samples(&valid, bound, mode);
            let constant = calibrate_constant(bound, &cs, cfg.calibration.quantile);
            let violations = constant.as_ref().map(|&c| count_violations(&vs, c)).unwrap_or(0);
            out.push(CalibrationRow {
                bound,
                mode,
                calib_samples: cs.len(),
                constant,
                valid_samples: vs.len(),
                violations,
                target: cfg.calibration.target,
            });
        }
    }
    Ok(out)
}

pub fn calibration_to_string(rows: &[CalibrationRow]) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| BenchError::Runtime(format!("csv: {e}"));
    w.write_record([
        "bound",
        "mode",
        "status",
        "calib_samples",
        "constant",
        "valid_samples",
        "violations",
        "violation_fraction",
        "within_target",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let (status, constant) = match &r.constant {
            Ok(c) => ("ok".to_string(), fmt_f64(*c)),
            Err(e) => (format!("error: {e}"), String::new()),
        };
        w.write_record([
            r.bound.key().to_string(),
            r.mode.key().to_string(),
            status,
            r.calib_samples.to_string(),
            constant,
            r.valid_samples.to_string(),
            r.violations.to_string(),
            fmt_f64(r.violation_fraction()),
            r.within_target().to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Runtime(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples_from(ratios: &[f64]) -> Vec<Sample> {
        ratios.iter().enumerate().map(|(i, &q)| (i as u64, q * 2.0, 2.0)).collect()
    }

    #[test]
    fn conformal_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        // ceil(101 * 0.99) = 100
        assert_eq!(conformal_quantile(&v, 0.99), 100.0);
        assert_eq!(conformal_quantile(&v, 0.5), 51.0);
        assert_eq!(conformal_quantile(&[3.0], 0.1), 3.0);
    }

    #[test]
    fn noiseless_gives_zero_constant() {
        let s: Vec<Sample> = (0..60).map(|i| (i, 0.0, if i % 2 == 0 { 0.0 } else { 1.0 })).collect();
        assert_eq!(calibrate_constant(BoundId::Nonsym, &s, 0.99), Ok(0.0));
    }

    #[test]
    fn ratios_below_one_give_constant_below_one() {
        let ratios: Vec<f64> = (0..80).map(|i| 0.2 + 0.01 * i as f64).collect();
        let c = calibrate_constant(BoundId::SymmetrizedRefined, &samples_from(&ratios), 0.99).unwrap();
        assert!(c <= 1.0);
        assert_eq!(count_violations(&samples_from(&ratios), c), 0);
    }

    #[test]
    fn calibration_failures() {
        let ok = samples_from(&[0.5; 60]);
        assert_eq!(calibrate_constant(BoundId::SymTwoInf, &ok, 0.99), Err(CalibrationError::ExplicitConstant(BoundId::SymTwoInf)));
        assert_eq!(calibrate_constant(BoundId::Nonsym, &ok[..49], 0.99), Err(CalibrationError::TooFew(49)));
        let mut bad = ok.clone();
        bad[7] = (7, 0.1, 0.0);
        assert!(matches!(calibrate_constant(BoundId::Nonsym, &bad, 0.99), Err(CalibrationError::ZeroBound { replicate: 7, .. })));
    }
}

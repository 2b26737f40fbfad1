//! Regime grids: perfect-clustering frequency per cell and mode.
//!
//! Gaussian grids vary `(gamma, nu)` with `n = m^gamma` and
//! `sigma = theta m^nu`; block-model grids vary `(alpha, beta)` with
//! `rho = n^-alpha` and `sample_size = n^beta`. Every cell reuses the same
//! replicate seeds, so neighbouring cells are compared on common random
//! numbers.

use twoinf_core::bounds::fmt_f64;
use twoinf_core::clustering::ClusteringMode;

use crate::config::{ExperimentConfig, ScenarioKind};
use crate::runner::{replicate_seeds, run_jobs, Scenario};
use crate::stats::{wilson, Z95};
use crate::BenchError;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    /// `gamma` or `alpha`.
    pub outer: f64,
    /// `nu` or `beta`.
    pub inner: f64,
    pub mode: ClusteringMode,
    pub replicates: usize,
    pub failures: usize,
    pub perfect: usize,
    pub interval: (f64, f64),
    pub mean_miscluster_rate: f64,
    /// Set when an easier cell (smaller `nu`, or larger `beta`) at the same
    /// outer value has an interval entirely below this one.
    pub trend_violation: bool,
}

impl SweepCell {
    pub fn frequency(&self) -> f64 {
        let ok = self.replicates - self.failures;
        if ok == 0 {
            0.0
        } else {
            self.perfect as f64 / ok as f64
        }
    }
}

fn cell_config(base: &ExperimentConfig, outer: f64, inner: f64) -> ExperimentConfig {
    let mut cfg = base.clone();
    match base.scenario {
        ScenarioKind::Gaussian => {
            let m = base.gaussian.m as f64;
            cfg.gaussian.n = m.powf(outer).round() as usize;
            cfg.gaussian.sigma = base.gaussian.theta * m.powf(inner);
        }
        ScenarioKind::SbmSlice => {
            let n = base.sbm.n as f64;
            cfg.sbm.rho = n.powf(-outer);
            cfg.sbm.sample_size = n.powf(inner).round() as usize;
        }
        _ => unreachable!("validated"),
    }
    cfg.bounds.clear();
    cfg
}

/// Whether cell `a` is at least as easy as `b` (same outer value).
fn easier(scenario: ScenarioKind, a: &SweepCell, b: &SweepCell) -> bool {
    match scenario {
        ScenarioKind::Gaussian => a.inner < b.inner,
        _ => a.inner > b.inner,
    }
}

pub fn run_sweep(base: &ExperimentConfig, threads: usize) -> Result<Vec<SweepCell>, BenchError> {
    let (outer, inner) = match base.scenario {
        ScenarioKind::Gaussian => (&base.sweep.gamma, &base.sweep.nu),
        _ => (&base.sweep.alpha, &base.sweep.beta),
    };
    let jobs = replicate_seeds(base.master_seed, base.replicates);
    let mut cells = Vec::new();
    for &o in outer {
        for &i in inner {
            let cfg = cell_config(base, o, i);
            let scenario = Scenario::new(&cfg)?;
            let rows = run_jobs(&scenario, &jobs, threads)?;
            for &mode in &cfg.modes {
                let mine: Vec<_> = rows.iter().filter(|r| r.mode == mode).collect();
                let ok: Vec<_> = mine.iter().filter_map(|r| r.ok().map(|o| (r.n, o))).collect();
                let perfect = ok.iter().filter(|(_, o)| o.miscluster == Some(0)).count();
                let rates: Vec<f64> =
                    ok.iter().filter_map(|(n, o)| o.miscluster.map(|c| c as f64 / *n as f64)).collect();
                cells.push(SweepCell {
                    outer: o,
                    inner: i,
                    mode,
                    replicates: mine.len(),
                    failures: mine.len() - ok.len(),
                    perfect,
                    interval: wilson(perfect, ok.len(), Z95),
                    mean_miscluster_rate: if rates.is_empty() { 0.0 } else { rates.iter().sum::<f64>() / rates.len() as f64 },
                    trend_violation: false,
                });
            }
        }
    }
    let flags: Vec<bool> = cells
        .iter()
        .map(|c| {
            cells.iter().any(|e| {
                e.mode == c.mode && e.outer == c.outer && easier(base.scenario, e, c) && e.interval.1 < c.interval.0
            })
        })
        .collect();
    for (c, f) in cells.iter_mut().zip(flags) {
        c.trend_violation = f;
    }
    Ok(cells)
}

/// Cells where `better` reaches perfect clustering in every replicate and
/// `worse` does not, as `(outer, inner)` pairs.
pub fn separating_cells(cells: &[SweepCell], better: ClusteringMode, worse: ClusteringMode) -> Vec<(f64, f64)> {
    cells
        .iter()
        .filter(|c| c.mode == better && c.frequency() == 1.0)
        .filter(|c| {
            cells
                .iter()
                .any(|w| w.mode == worse && w.outer == c.outer && w.inner == c.inner && w.frequency() < 1.0)
        })
        .map(|c| (c.outer, c.inner))
        .collect()
}

pub fn sweep_to_string(scenario: ScenarioKind, cells: &[SweepCell]) -> Result<String, BenchError> {
    let (outer, inner) = match scenario {
        ScenarioKind::Gaussian => ("gamma", "nu"),
        _ => ("alpha", "beta"),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| BenchError::Runtime(format!("csv: {e}"));
    w.write_record([
        outer,
        inner,
        "mode",
        "replicates",
        "failures",
        "perfect",
        "perfect_frequency",
        "wilson_lo",
        "wilson_hi",
        "mean_miscluster_rate",
        "trend_violation",
    ])
    .map_err(csv_err)?;
    for c in cells {
        w.write_record([
            fmt_f64(c.outer),
            fmt_f64(c.inner),
            c.mode.key().to_string(),
            c.replicates.to_string(),
            c.failures.to_string(),
            c.perfect.to_string(),
            fmt_f64(c.frequency()),
            fmt_f64(c.interval.0),
            fmt_f64(c.interval.1),
            fmt_f64(c.mean_miscluster_rate),
            c.trend_violation.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Runtime(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_parameters() {
        let mut base = ExperimentConfig::default();
        base.gaussian.m = 100;
        let cfg = cell_config(&base, 1.5, -0.5);
        assert_eq!(cfg.gaussian.n, 1000);
        assert!((cfg.gaussian.sigma - 0.1).abs() < 1e-12);

        base.scenario = ScenarioKind::SbmSlice;
        base.sbm.n = 4096;
        let cfg = cell_config(&base, 0.5, 0.5);
        assert_eq!(cfg.sbm.sample_size, 64);
        assert!((cfg.sbm.rho - 1.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn separating_cells_need_full_success() {
        let cell = |inner: f64, mode, perfect: usize| SweepCell {
            outer: 1.0,
            inner,
            mode,
            replicates: 20,
            failures: 0,
            perfect,
            interval: wilson(perfect, 20, Z95),
            mean_miscluster_rate: 0.0,
            trend_violation: false,
        };
        let cells = vec![
            cell(-1.0, ClusteringMode::Direct, 20),
            cell(0.0, ClusteringMode::Direct, 0),
            cell(-1.0, ClusteringMode::SymmetrizedHollow, 20),
            cell(0.0, ClusteringMode::SymmetrizedHollow, 20),
        ];
        assert_eq!(separating_cells(&cells, ClusteringMode::SymmetrizedHollow, ClusteringMode::Direct), vec![(1.0, 0.0)]);
        assert!(separating_cells(&cells, ClusteringMode::Direct, ClusteringMode::SymmetrizedHollow).is_empty());
    }
}

//! CSV rows and per-mode summaries.
//!
//! Row schema, in column order:
//!
//! `replicate, seed, mode, status, n, miscluster_count, miscluster_rate,
//! two_inf_error, sin_theta_spectral, kmeans_objective, certificate_fired,
//! certificate_threshold, certificate_margin, audit_hypothesis_holds,
//! audit_conclusion_holds`, then for every configured bound `<id>`:
//! `bound.<id>.value, bound.<id>.preconditions_met,
//! bound.<id>.constant_explicit, bound.<id>.term.<label>...,
//! bound.<id>.notes, bound.<id>.ratio`.
//!
//! Cells that do not apply (no ground truth, bound not evaluated for the
//! mode) are empty. Timings are deliberately absent so that reruns are
//! byte-identical.

use std::io::Write;

use twoinf_core::bounds::{fmt_f64, term_labels, BoundId};
use twoinf_core::clustering::ClusteringMode;

use crate::runner::{BoundOutcome, ReplicateRow};
use crate::stats::{wilson, Z95};
use crate::BenchError;

const BASE_COLUMNS: [&str; 15] = [
    "replicate",
    "seed",
    "mode",
    "status",
    "n",
    "miscluster_count",
    "miscluster_rate",
    "two_inf_error",
    "sin_theta_spectral",
    "kmeans_objective",
    "certificate_fired",
    "certificate_threshold",
    "certificate_margin",
    "audit_hypothesis_holds",
    "audit_conclusion_holds",
];

pub fn header(bounds: &[BoundId]) -> Vec<String> {
    let mut h: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    for b in bounds {
        let id = b.key();
        h.push(format!("bound.{id}.value"));
        h.push(format!("bound.{id}.preconditions_met"));
        h.push(format!("bound.{id}.constant_explicit"));
        for label in term_labels(*b) {
            h.push(format!("bound.{id}.term.{label}"));
        }
        h.push(format!("bound.{id}.notes"));
        h.push(format!("bound.{id}.ratio"));
    }
    h
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn optf(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn bound_cells(b: BoundId, outcome: Option<&BoundOutcome>) -> Vec<String> {
    let width = term_labels(b).len() + 5;
    let Some(o) = outcome else {
        return vec![String::new(); width];
    };
    match &o.report {
        Ok(rep) => {
            let mut cells = vec![fmt_f64(rep.value), rep.preconditions_met.to_string(), rep.constant_explicit.to_string()];
            for label in term_labels(b) {
                cells.push(optf(rep.term(label)));
            }
            cells.push(rep.notes_text());
            cells.push(optf(o.ratio()));
            cells
        }
        Err(e) => {
            let mut cells = vec![String::new(); width];
            cells[width - 2] = format!("error: {e}");
            cells
        }
    }
}

pub fn record(row: &ReplicateRow, bounds: &[BoundId]) -> Vec<String> {
    let mut cells = vec![row.replicate.to_string(), row.seed.to_string(), row.mode.key().to_string()];
    match &row.outcome {
        Ok(o) => {
            cells.push("ok".into());
            cells.push(row.n.to_string());
            cells.push(opt(o.miscluster));
            cells.push(optf(o.miscluster.map(|c| c as f64 / row.n as f64)));
            cells.push(optf(o.two_inf_error));
            cells.push(optf(o.sin_theta));
            cells.push(fmt_f64(o.objective));
            let cert = o.certificate.as_ref();
            cells.push(opt(cert.map(|c| c.fired)));
            cells.push(optf(cert.map(|c| c.threshold)));
            cells.push(optf(cert.map(|c| c.margin)));
            cells.push(opt(o.audit.as_ref().map(|a| a.hypothesis_holds)));
            cells.push(opt(o.audit.as_ref().map(|a| a.conclusion_holds)));
        }
        Err(e) => {
            cells.push(format!("error: {e}"));
            cells.push(row.n.to_string());
            cells.extend(std::iter::repeat_n(String::new(), BASE_COLUMNS.len() - 5));
        }
    }
    for &b in bounds {
        cells.extend(bound_cells(b, row.bound(b)));
    }
    cells
}

pub fn write_rows<W: Write>(out: W, rows: &[ReplicateRow], bounds: &[BoundId]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| BenchError::Runtime(format!("csv: {e}"));
    w.write_record(header(bounds)).map_err(csv_err)?;
    for row in rows {
        w.write_record(record(row, bounds)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| BenchError::Runtime(format!("csv: {e}")))?;
    Ok(())
}

pub fn rows_to_string(rows: &[ReplicateRow], bounds: &[BoundId]) -> Result<String, BenchError> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, bounds)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundSummary {
    pub bound: BoundId,
    pub evaluated: usize,
    pub preconditions_met: usize,
    /// Rows with error above an explicit-constant bound whose
    /// preconditions hold.
    pub violations: usize,
    pub max_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSummary {
    pub mode: ClusteringMode,
    pub replicates: usize,
    pub failures: usize,
    pub mean_error: Option<f64>,
    pub max_error: Option<f64>,
    pub mean_miscluster_rate: Option<f64>,
    pub perfect: usize,
    pub perfect_interval: (f64, f64),
    pub certificate_fired: usize,
    /// Certified replicates that still had misclustered points.
    pub certified_with_errors: usize,
    pub bounds: Vec<BoundSummary>,
}

impl ModeSummary {
    pub fn perfect_frequency(&self) -> f64 {
        let ok = self.replicates - self.failures;
        if ok == 0 {
            0.0
        } else {
            self.perfect as f64 / ok as f64
        }
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn summarize(rows: &[ReplicateRow], modes: &[ClusteringMode], bounds: &[BoundId]) -> Vec<ModeSummary> {
    modes
        .iter()
        .map(|&mode| {
            let mine: Vec<&ReplicateRow> = rows.iter().filter(|r| r.mode == mode).collect();
            let ok: Vec<_> = mine.iter().filter_map(|r| r.ok().map(|o| (r.n, o))).collect();
            let errors: Vec<f64> = ok.iter().filter_map(|(_, o)| o.two_inf_error).collect();
            let rates: Vec<f64> =
                ok.iter().filter_map(|(n, o)| o.miscluster.map(|c| c as f64 / *n as f64)).collect();
            let labelled = ok.iter().filter(|(_, o)| o.miscluster.is_some()).count();
            let perfect = ok.iter().filter(|(_, o)| o.miscluster == Some(0)).count();
            let fired: Vec<_> = ok.iter().filter(|(_, o)| o.certificate.as_ref().is_some_and(|c| c.fired)).collect();
            let bound_summaries = bounds
                .iter()
                .filter_map(|&b| {
                    let outs: Vec<&BoundOutcome> = mine.iter().filter_map(|r| r.bound(b)).collect();
                    if outs.is_empty() {
                        return None;
                    }
                    let reports: Vec<_> = outs.iter().filter(|o| o.report.is_ok()).collect();
                    Some(BoundSummary {
                        bound: b,
                        evaluated: reports.len(),
                        preconditions_met: reports
                            .iter()
                            .filter(|o| o.report.as_ref().is_ok_and(|r| r.preconditions_met))
                            .count(),
                        violations: outs.iter().filter(|o| o.violated()).count(),
                        max_ratio: outs.iter().filter_map(|o| o.ratio()).reduce(f64::max),
                    })
                })
                .collect();
            ModeSummary {
                mode,
                replicates: mine.len(),
                failures: mine.len() - ok.len(),
                mean_error: mean(&errors),
                max_error: errors.iter().cloned().reduce(f64::max),
                mean_miscluster_rate: mean(&rates),
                perfect,
                perfect_interval: wilson(perfect, labelled, Z95),
                certificate_fired: fired.len(),
                certified_with_errors: fired.iter().filter(|(_, o)| o.miscluster.is_some_and(|c| c > 0)).count(),
                bounds: bound_summaries,
            }
        })
        .collect()
}

/// Summary as CSV, one row per (mode, bound) with the mode columns
/// repeated; modes without bounds get a single row.
pub fn summary_to_string(summaries: &[ModeSummary]) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| BenchError::Runtime(format!("csv: {e}"));
    w.write_record([
        "mode",
        "replicates",
        "failures",
        "mean_two_inf_error",
        "max_two_inf_error",
        "mean_miscluster_rate",
        "perfect",
        "perfect_frequency",
        "perfect_wilson_lo",
        "perfect_wilson_hi",
        "certificate_fired",
        "certified_with_errors",
        "bound",
        "bound_evaluated",
        "bound_preconditions_met",
        "bound_violations",
        "bound_max_ratio",
    ])
    .map_err(csv_err)?;
    for s in summaries {
        let base = vec![
            s.mode.key().to_string(),
            s.replicates.to_string(),
            s.failures.to_string(),
            optf(s.mean_error),
            optf(s.max_error),
            optf(s.mean_miscluster_rate),
            s.perfect.to_string(),
            fmt_f64(s.perfect_frequency()),
            fmt_f64(s.perfect_interval.0),
            fmt_f64(s.perfect_interval.1),
            s.certificate_fired.to_string(),
            s.certified_with_errors.to_string(),
        ];
        if s.bounds.is_empty() {
            let mut rec = base.clone();
            rec.extend(std::iter::repeat_n(String::new(), 5));
            w.write_record(rec).map_err(csv_err)?;
        }
        for b in &s.bounds {
            let mut rec = base.clone();
            rec.extend([
                b.bound.key().to_string(),
                b.evaluated.to_string(),
                b.preconditions_met.to_string(),
                b.violations.to_string(),
                optf(b.max_ratio),
            ]);
            w.write_record(rec).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Runtime(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lists_every_term() {
        let h = header(&[BoundId::SymTwoInf, BoundId::SymmetrizedRefined]);
        assert_eq!(h.len(), BASE_COLUMNS.len() + (3 + 5) + (5 + 5));
        assert!(h.contains(&"bound.thm2.term.delta_eu".to_string()));
        assert!(h.contains(&"bound.thm6.term.uu0_knobs".to_string()));
        assert_eq!(h.last().unwrap(), "bound.thm6.ratio");
    }

    #[test]
    fn error_rows_keep_the_width() {
        let row = ReplicateRow {
            replicate: 3,
            seed: 9,
            mode: ClusteringMode::Direct,
            n: 0,
            outcome: Err("generation: nope".into()),
        };
        let bounds = [BoundId::Nonsym];
        let rec = record(&row, &bounds);
        assert_eq!(rec.len(), header(&bounds).len());
        assert_eq!(rec[3], "error: generation: nope");
    }
}

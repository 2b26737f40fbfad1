use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use twoinf_bench::calibrate::{calibration_to_string, run_calibration};
use twoinf_bench::config::bound_applies;
use twoinf_bench::dump::dump_instance;
use twoinf_bench::output::{rows_to_string, summarize, summary_to_string};
use twoinf_bench::runner::{evaluate_mode, run_replicate, Scenario};
use twoinf_bench::sweep::{run_sweep, separating_cells, sweep_to_string};
use twoinf_bench::{run_experiment, BenchError, ExperimentConfig, Purpose};
use twoinf_core::bounds::{BoundId, BoundReport};
use twoinf_core::clustering::ClusteringMode;
use twoinf_core::rng::derive_seed;

#[derive(Parser)]
#[command(name = "twoinf", version, about = "Two-to-infinity perturbation bounds and spectral clustering experiments")]
struct Cli {
    /// TOML experiment config; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replicates (output does not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output CSV path; overrides `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the resolved config, defaults included, and exit.
    #[arg(long, global = true)]
    print_config: bool,
    /// Lift the size caps in `[limits]`.
    #[arg(long, global = true)]
    no_limits: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate bounds for matrices read from files.
    Bounds,
    /// Cluster one instance end to end.
    Cluster {
        /// Write the instance, truth and estimated labels to this directory.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Monte Carlo replicates; one CSV row per (replicate, mode).
    Simulate,
    /// Perfect-clustering frequencies over a regime grid.
    Sweep,
    /// Fit constants of constant-free bounds and validate them.
    Calibrate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twoinf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn purpose(c: &Command) -> Purpose {
    match c {
        Command::Bounds => Purpose::Bounds,
        Command::Cluster { .. } => Purpose::Cluster,
        Command::Simulate => Purpose::Simulate,
        Command::Sweep => Purpose::Sweep,
        Command::Calibrate => Purpose::Calibrate,
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), BenchError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| BenchError::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), BenchError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    cfg.validate(purpose(&cli.command), !cli.no_limits)?;
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let started = Instant::now();
    let out = cfg.output.clone();
    match &cli.command {
        Command::Bounds => bounds(&cfg)?,
        Command::Cluster { dump } => cluster(&cfg, dump.as_deref())?,
        Command::Simulate => {
            let rows = run_experiment(&cfg, threads)?;
            let summary = summary_to_string(&summarize(&rows, &cfg.modes, &cfg.bounds))?;
            match &out {
                Some(p) => {
                    emit(Some(p), &rows_to_string(&rows, &cfg.bounds)?)?;
                    emit(Some(&p.with_extension("summary.csv")), &summary)?;
                    print!("{summary}");
                }
                None => print!("{}", rows_to_string(&rows, &cfg.bounds)?),
            }
        }
        Command::Sweep => {
            let cells = run_sweep(&cfg, threads)?;
            emit(out.as_deref(), &sweep_to_string(cfg.scenario, &cells)?)?;
            let flagged = cells.iter().filter(|c| c.trend_violation).count();
            eprintln!("trend check: {flagged} cell(s) below an easier neighbour beyond interval overlap");
            let sep = separating_cells(&cells, ClusteringMode::SymmetrizedHollow, ClusteringMode::Direct);
            if !sep.is_empty() {
                eprintln!("cells where symmetrized-hollow is perfect and direct is not: {sep:?}");
            }
        }
        Command::Calibrate => {
            let rows = run_calibration(&cfg, threads)?;
            emit(out.as_deref(), &calibration_to_string(&rows)?)?;
            if out.is_some() {
                print!("{}", calibration_to_string(&rows)?);
            }
        }
    }
    eprintln!("done in {:.1?}", started.elapsed());
    Ok(())
}

#[derive(Serialize)]
struct BoundOutput {
    mode: ClusteringMode,
    empirical: Option<f64>,
    ratio: Option<f64>,
    report: Option<BoundReport>,
    error: Option<String>,
}

/// Each bound is evaluated on every configured mode it speaks about; a
/// bound with no such mode gets its natural one (direct for the
/// rectangular bound, symmetrized otherwise).
fn bounds(cfg: &ExperimentConfig) -> Result<(), BenchError> {
    let mut cfg = cfg.clone();
    let gram = cfg.gram_observation();
    let wanted = if cfg.bounds.is_empty() {
        BoundId::ALL.iter().copied().filter(|&b| !gram || bound_applies(b, ClusteringMode::Direct, true)).collect()
    } else {
        cfg.bounds.clone()
    };
    for &b in &wanted {
        if !cfg.modes.iter().any(|&m| bound_applies(b, m, gram)) {
            cfg.modes.push(if b == BoundId::Nonsym { ClusteringMode::Direct } else { ClusteringMode::Symmetrized });
        }
    }
    cfg.bounds = wanted;
    let scenario = Scenario::new(&cfg)?;
    let inst = scenario.instance(cfg.master_seed).map_err(|e| BenchError::Runtime(e.to_string()))?;
    let mut outputs = Vec::new();
    for &mode in &cfg.modes {
        let o = evaluate_mode(&inst, mode, &cfg, cfg.master_seed).map_err(|e| BenchError::Runtime(e.to_string()))?;
        for b in o.bounds.iter() {
            let ratio = b.ratio();
            let (report, error) = match &b.report {
                Ok(r) => (Some(r.clone()), None),
                Err(e) => (None, Some(e.clone())),
            };
            outputs.push(BoundOutput { mode, empirical: b.empirical, ratio, report, error });
        }
    }
    let json = serde_json::to_string_pretty(&outputs).map_err(|e| BenchError::Runtime(e.to_string()))?;
    println!("{json}");
    if let Some(p) = &cfg.output {
        let rows = run_replicate(&scenario, 0, cfg.master_seed);
        emit(Some(p), &rows_to_string(&rows, &cfg.bounds)?)?;
    }
    Ok(())
}

/// The instance is replicate 0 of the configured run.
fn cluster(cfg: &ExperimentConfig, dump: Option<&Path>) -> Result<(), BenchError> {
    let scenario = Scenario::new(cfg)?;
    let seed = derive_seed(cfg.master_seed, 0);
    let rows = run_replicate(&scenario, 0, seed);
    for row in &rows {
        match &row.outcome {
            Ok(o) => {
                let mut line = format!("{:<20} objective {:.6e}", row.mode.key(), o.objective);
                if let Some(c) = o.miscluster {
                    line += &format!("  misclustered {c}/{}", row.n);
                }
                if let Some(e) = o.two_inf_error {
                    line += &format!("  two_inf_error {e:.4e}");
                }
                if let Some(c) = &o.certificate {
                    line += &format!("  certificate {} (margin {:.3e})", if c.fired { "fired" } else { "silent" }, c.margin);
                }
                println!("{line}");
            }
            Err(e) => println!("{:<20} error: {e}", row.mode.key()),
        }
    }
    if let Some(p) = &cfg.output {
        emit(Some(p), &rows_to_string(&rows, &cfg.bounds)?)?;
    }
    if let Some(dir) = dump {
        let inst = scenario.instance(seed).map_err(|e| BenchError::Runtime(e.to_string()))?;
        let estimates: Vec<_> = rows.iter().filter_map(|r| r.ok().map(|o| (r.mode, o.zhat.clone()))).collect();
        let meta = dump_instance(dir, cfg, seed, &inst, &estimates)?;
        eprintln!("wrote {} files to {}", meta.files.len(), dir.display());
    }
    Ok(())
}

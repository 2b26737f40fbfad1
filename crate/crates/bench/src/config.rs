//! Experiment configuration, read from TOML.
//!
//! Every section has defaults, so a config file only needs the keys it
//! changes; `--print-config` shows the resolved form.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twoinf_core::bounds::BoundId;
use twoinf_core::clustering::ClusteringMode;
use twoinf_core::generators::GaussianScenario;

use crate::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Gaussian,
    SbmSlice,
    Multilayer,
    MatrixFiles,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Gaussian => "gaussian",
            ScenarioKind::SbmSlice => "sbm-slice",
            ScenarioKind::Multilayer => "multilayer",
            ScenarioKind::MatrixFiles => "matrix-files",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianParams {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub theta: f64,
    pub sigma: f64,
    pub c_sigma: f64,
    pub balance: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        GaussianParams { n: 400, m: 400, r: 3, theta: 1.0, sigma: 1.0, c_sigma: 0.25, balance: 1.5 }
    }
}

impl GaussianParams {
    pub fn scenario(&self, seed: u64) -> GaussianScenario {
        let mut s = GaussianScenario::new(self.n, self.m, self.r, self.theta, self.sigma, seed);
        s.c_sigma = self.c_sigma;
        s.balance = self.balance;
        s
    }
}

/// Sub-sampled block model with `Q0 = (1 - b) I + b 1 1^T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbmParams {
    pub n: usize,
    pub r: usize,
    pub b: f64,
    pub rho: f64,
    pub sample_size: usize,
}

impl Default for SbmParams {
    fn default() -> Self {
        SbmParams { n: 4096, r: 2, b: 0.2, rho: 1.0 / 64.0, sample_size: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultilayerParams {
    pub n: usize,
    pub layers: usize,
    /// Ambient rank of each group; the number of groups is its length.
    pub ranks: Vec<usize>,
    pub rho: f64,
}

impl Default for MultilayerParams {
    fn default() -> Self {
        MultilayerParams { n: 500, layers: 60, ranks: vec![2, 2, 2], rho: 0.2 }
    }
}

/// Observation (and optional truth) read from matrix files. With
/// `symmetric = true` the files hold `Y` and `Yhat` directly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilesParams {
    pub xhat: Option<PathBuf>,
    pub x: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub r: usize,
    pub symmetric: bool,
}

/// Analytic row-concentration rates. Generated scenarios derive them from
/// their parameters; set this section to override, or to supply them for
/// matrix files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnobValues {
    pub eps1: f64,
    pub eps2: f64,
    pub t_eps1: f64,
    pub t_eps2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Approximation slack used by the k-means audit.
    pub a: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig { restarts: 20, max_iters: 100, a: 0.5 }
    }
}

/// Half-open seed ranges `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub calib_seeds: (u64, u64),
    pub valid_seeds: (u64, u64),
    pub quantile: f64,
    /// Largest acceptable validation violation fraction.
    pub target: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig { calib_seeds: (0, 100), valid_seeds: (100, 300), quantile: 0.99, target: 0.01 }
    }
}

/// Regime grid. Gaussian: `n = m^gamma`, `sigma = theta m^nu` with `m`
/// fixed. Block model: `rho = n^-alpha`, `sample_size = n^beta` with `n`
/// fixed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gamma: Vec<f64>,
    pub nu: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub max_n: usize,
    pub max_layers: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_n: 8192, max_layers: 512 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub modes: Vec<ClusteringMode>,
    pub bounds: Vec<BoundId>,
    pub replicates: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub gaussian: GaussianParams,
    pub sbm: SbmParams,
    pub multilayer: MultilayerParams,
    pub files: FilesParams,
    pub knobs: Option<KnobValues>,
    pub kmeans: KMeansConfig,
    pub calibration: CalibrationConfig,
    pub sweep: SweepConfig,
    pub limits: Limits,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioKind::Gaussian,
            modes: vec![ClusteringMode::Direct],
            bounds: Vec::new(),
            replicates: 1,
            master_seed: 0,
            output: None,
            gaussian: GaussianParams::default(),
            sbm: SbmParams::default(),
            multilayer: MultilayerParams::default(),
            files: FilesParams::default(),
            knobs: None,
            kmeans: KMeansConfig::default(),
            calibration: CalibrationConfig::default(),
            sweep: SweepConfig::default(),
            limits: Limits::default(),
        }
    }
}

/// Which subcommand the config is validated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Bounds,
    Cluster,
    Simulate,
    Sweep,
    Calibrate,
}

/// Which estimate a bound speaks about: the rectangular one (direct mode)
/// or the symmetrized one.
pub fn bound_applies(bound: BoundId, mode: ClusteringMode, gram_observation: bool) -> bool {
    if gram_observation {
        return bound_supported_on_gram(bound);
    }
    match bound {
        BoundId::Nonsym => mode == ClusteringMode::Direct,
        _ => mode != ClusteringMode::Direct,
    }
}

/// Bounds that need only `Y` and `Yhat`.
pub fn bound_supported_on_gram(bound: BoundId) -> bool {
    matches!(bound, BoundId::DavisKahan | BoundId::SymTwoInf | BoundId::RankR | BoundId::SymRefined)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(vec![e.to_string()]))
    }

    /// Reads a config file; relative paths in `[files]` and `output` are
    /// taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(inner) = p {
                if inner.is_relative() {
                    *inner = base.join(&*inner);
                }
            }
        };
        rebase(&mut cfg.files.xhat);
        rebase(&mut cfg.files.x);
        rebase(&mut cfg.files.labels);
        rebase(&mut cfg.output);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Whether the observation is handled through its Gram matrix.
    pub fn gram_observation(&self) -> bool {
        match self.scenario {
            ScenarioKind::Multilayer => true,
            ScenarioKind::MatrixFiles => self.files.symmetric,
            _ => false,
        }
    }

    /// Cluster count of the configured scenario.
    pub fn rank(&self) -> usize {
        match self.scenario {
            ScenarioKind::Gaussian => self.gaussian.r,
            ScenarioKind::SbmSlice => self.sbm.r,
            ScenarioKind::Multilayer => self.multilayer.ranks.len(),
            ScenarioKind::MatrixFiles => self.files.r,
        }
    }

    /// Every problem with the config, for the given subcommand.
    pub fn validate(&self, purpose: Purpose, enforce_limits: bool) -> Result<(), BenchError> {
        let mut problems = Vec::new();
        self.check_common(&mut problems, purpose);
        self.check_scenario(&mut problems, enforce_limits);
        match purpose {
            Purpose::Bounds => {
                if self.scenario != ScenarioKind::MatrixFiles {
                    problems.push(format!("`bounds` reads matrix files; scenario is {}", self.scenario));
                }
                if self.files.x.is_none() {
                    problems.push("`bounds` needs the truth file [files].x".into());
                }
            }
            Purpose::Sweep => self.check_sweep(&mut problems),
            Purpose::Calibrate => self.check_calibration(&mut problems),
            Purpose::Cluster | Purpose::Simulate => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(BenchError::Config(problems))
        }
    }

    fn check_common(&self, problems: &mut Vec<String>, purpose: Purpose) {
        if self.replicates == 0 {
            problems.push("replicates must be at least 1".into());
        }
        if self.modes.is_empty() && purpose != Purpose::Bounds {
            problems.push("modes must name at least one clustering mode".into());
        }
        for (i, m) in self.modes.iter().enumerate() {
            if self.modes[..i].contains(m) {
                problems.push(format!("mode {m} listed twice"));
            }
        }
        for (i, b) in self.bounds.iter().enumerate() {
            if self.bounds[..i].contains(b) {
                problems.push(format!("bound {b} listed twice"));
            }
            let gram = self.gram_observation();
            if gram && !bound_supported_on_gram(*b) {
                problems.push(format!("bound {b} needs the rectangular observation, unavailable for {}", self.scenario));
            } else if purpose != Purpose::Bounds && !self.modes.iter().any(|&m| bound_applies(*b, m, gram)) {
                let need = if *b == BoundId::Nonsym { "direct" } else { "a symmetrized mode" };
                problems.push(format!("bound {b} is evaluated on {need}, which is not among the modes"));
            }
        }
        if self.kmeans.restarts == 0 {
            problems.push("kmeans.restarts must be at least 1".into());
        }
        if !(self.kmeans.a > 0.0) {
            problems.push(format!("kmeans.a must be positive, got {}", self.kmeans.a));
        }
        if let Some(k) = self.knobs {
            if [k.eps1, k.eps2, k.t_eps1, k.t_eps2].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                problems.push("knobs must be finite and nonnegative".into());
            }
        }
    }

    fn check_scenario(&self, problems: &mut Vec<String>, enforce_limits: bool) {
        let lim = self.limits;
        let mut cap = |what: &str, value: usize, max: usize| {
            if enforce_limits && value > max {
                problems.push(format!("{what} = {value} exceeds the cap {max} (pass --no-limits to override)"));
            }
        };
        match self.scenario {
            ScenarioKind::Gaussian => {
                let g = &self.gaussian;
                cap("gaussian.n", g.n, lim.max_n);
                cap("gaussian.m", g.m, lim.max_n);
                if let Err(e) = g.scenario(0).validate() {
                    problems.push(format!("gaussian: {e}"));
                }
            }
            ScenarioKind::SbmSlice => {
                let s = &self.sbm;
                cap("sbm.n", s.n, lim.max_n);
                if s.r == 0 || s.n < 2 * s.r {
                    problems.push(format!("sbm: need r >= 1 and n >= 2r (n={}, r={})", s.n, s.r));
                }
                if !(0.0..1.0).contains(&s.b) {
                    problems.push(format!("sbm.b must lie in [0, 1), got {}", s.b));
                }
                if !(s.rho > 0.0 && s.rho <= 1.0) {
                    problems.push(format!("sbm.rho must lie in (0, 1], got {}", s.rho));
                }
                if s.sample_size <= s.r || s.sample_size >= s.n {
                    problems.push(format!("sbm.sample_size must lie in ({}, {})", s.r, s.n));
                }
            }
            ScenarioKind::Multilayer => {
                let m = &self.multilayer;
                cap("multilayer.n", m.n, lim.max_n);
                cap("multilayer.layers", m.layers, lim.max_layers);
                if m.ranks.len() < 2 || m.ranks.contains(&0) {
                    problems.push("multilayer.ranks needs at least two positive entries".into());
                }
                if m.layers <= m.ranks.len() {
                    problems.push(format!("multilayer.layers must exceed the group count {}", m.ranks.len()));
                }
                if !(m.rho > 0.0 && m.rho <= 1.0) {
                    problems.push(format!("multilayer.rho must lie in (0, 1], got {}", m.rho));
                }
            }
            ScenarioKind::MatrixFiles => {
                let f = &self.files;
                match &f.xhat {
                    None => problems.push("matrix-files needs [files].xhat".into()),
                    Some(p) if !p.is_file() => problems.push(format!("file not found: {}", p.display())),
                    _ => {}
                }
                for p in [&f.x, &f.labels].into_iter().flatten() {
                    if !p.is_file() {
                        problems.push(format!("file not found: {}", p.display()));
                    }
                }
                if f.r == 0 {
                    problems.push("[files].r must be at least 1".into());
                }
                if !self.bounds.is_empty() && f.x.is_none() {
                    problems.push("bounds need the truth file [files].x".into());
                }
                let needs_knobs = self.bounds.iter().any(|b| !b.constant_explicit());
                if needs_knobs && self.knobs.is_none() {
                    problems.push("bounds without explicit constants need a [knobs] section for matrix files".into());
                }
            }
        }
    }

    fn check_sweep(&self, problems: &mut Vec<String>) {
        let s = &self.sweep;
        match self.scenario {
            ScenarioKind::Gaussian => {
                if s.gamma.is_empty() || s.nu.is_empty() {
                    problems.push("gaussian sweep needs nonempty sweep.gamma and sweep.nu".into());
                }
                if s.gamma.iter().any(|g| !(*g > 0.0)) {
                    problems.push("sweep.gamma entries must be positive".into());
                }
                for &g in &s.gamma {
                    let n = (self.gaussian.m as f64).powf(g).round() as usize;
                    if n <= self.gaussian.r || n > self.limits.max_n {
                        problems.push(format!("gamma = {g} gives n = {n}, outside ({}, {}]", self.gaussian.r, self.limits.max_n));
                    }
                }
            }
            ScenarioKind::SbmSlice => {
                if s.alpha.is_empty() || s.beta.is_empty() {
                    problems.push("sbm-slice sweep needs nonempty sweep.alpha and sweep.beta".into());
                }
                if s.alpha.iter().any(|a| !(*a >= 0.0)) {
                    problems.push("sweep.alpha entries must be nonnegative".into());
                }
                for &b in &s.beta {
                    let m = (self.sbm.n as f64).powf(b).round() as usize;
                    if m <= self.sbm.r || m >= self.sbm.n {
                        problems.push(format!("beta = {b} gives sample size {m}, outside ({}, {})", self.sbm.r, self.sbm.n));
                    }
                }
            }
            other => problems.push(format!("sweeps are defined for gaussian and sbm-slice, not {other}")),
        }
    }

    fn check_calibration(&self, problems: &mut Vec<String>) {
        let c = &self.calibration;
        let (a0, a1) = c.calib_seeds;
        let (b0, b1) = c.valid_seeds;
        if a1 < a0 + 50 {
            problems.push(format!("calibration needs at least 50 seeds, range [{a0}, {a1}) has {}", a1.saturating_sub(a0)));
        }
        if b1 <= b0 {
            problems.push(format!("validation seed range [{b0}, {b1}) is empty"));
        }
        if a0 < b1 && b0 < a1 {
            problems.push(format!("calibration [{a0}, {a1}) and validation [{b0}, {b1}) seed ranges overlap"));
        }
        if !(c.quantile > 0.0 && c.quantile <= 1.0) {
            problems.push(format!("calibration.quantile must lie in (0, 1], got {}", c.quantile));
        }
        if self.bounds.iter().all(|b| b.constant_explicit()) {
            problems.push("calibration needs at least one bound without explicit constants (thm3..thm6)".into());
        }
        for b in self.bounds.iter().filter(|b| b.constant_explicit()) {
            problems.push(format!("bound {b} has explicit constants and is not calibrated"));
        }
    }
}

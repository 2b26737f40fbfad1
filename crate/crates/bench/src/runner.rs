//! One replicate: draw (or load) an instance, embed and cluster it in every
//! configured mode, and evaluate the configured bounds against the realized
//! error.

use rayon::prelude::*;
use twoinf_core::bounds::{
    bernstein_knobs, davis_kahan_bound, error_split, gaussian_rate_profile, nonsym_error_profile_with,
    rank_r_sym_bound, sym_error_profile_with, sym_refined_bound, sym_two_inf_bound, symmetrize_estimate,
    symmetrized_profile_with, symmetrized_refined_bound, symmetrized_two_inf_bound, nonsym_two_inf_bound,
    AssumptionKnobs, BoundId, BoundReport, NonsymErrorProfile, SymErrorProfile, SymmetrizedProfile,
};
use twoinf_core::clustering::{
    abbe_fan_audit, approx_kmeans, embed, embed_gram, miscluster_count, perfect_clustering_certificate, Certificate,
    ClusterModel, ClusteringMode, KMeansAudit, KMeansParams,
};
use twoinf_core::generators::{gen_gaussian_mixture, gen_multilayer, gen_sbm_slice, MultilayerModel, SbmModel};
use twoinf_core::linalg::{
    aligned_two_inf_error, hollow, leading_eigs, procrustes_align, sin_theta, spectral_norm, svd_r, SinThetaFlavor,
};
use twoinf_core::rng::derive_seed;
use twoinf_core::{io, DenseMatrix, SpectralPair};

use crate::config::{bound_applies, ExperimentConfig, KnobValues, ScenarioKind};
use crate::BenchError;

/// Stream index of the k-means seed under a replicate seed; shared by all
/// modes so mode comparisons are paired.
const KMEANS_STREAM: u64 = 0xC1;

pub enum Observation {
    /// Rectangular `Xhat`, with the truth `X` when known.
    Rect { xhat: DenseMatrix, x: Option<DenseMatrix> },
    /// Symmetric `Yhat` (a Gram matrix for multilayer data), with the truth.
    Gram { hat: DenseMatrix, truth: Option<DenseMatrix> },
}

/// A drawn or loaded instance, normalized across scenarios.
pub struct Instance {
    pub obs: Observation,
    pub r: usize,
    pub model: Option<ClusterModel>,
    /// Orthonormal basis of the true leading subspace.
    pub truth_basis: Option<DenseMatrix>,
    pub knobs: KnobValues,
    /// Scenario constants recorded with dumps.
    pub constants: Vec<(String, f64)>,
}

impl Instance {
    pub fn rows(&self) -> usize {
        match &self.obs {
            Observation::Rect { xhat, .. } => xhat.rows(),
            Observation::Gram { hat, .. } => hat.rows(),
        }
    }
}

/// Matrix files are read once and shared by all replicates.
pub struct Scenario<'a> {
    cfg: &'a ExperimentConfig,
    files: Option<FileData>,
}

struct FileData {
    xhat: DenseMatrix,
    x: Option<DenseMatrix>,
    labels: Option<Vec<usize>>,
}

fn to_runtime(e: twoinf_core::Error) -> BenchError {
    BenchError::Runtime(e.to_string())
}

impl<'a> Scenario<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Result<Self, BenchError> {
        let files = if cfg.scenario == ScenarioKind::MatrixFiles {
            let f = &cfg.files;
            let xhat = io::read_matrix(f.xhat.as_ref().expect("validated")).map_err(to_runtime)?;
            let x = f.x.as_ref().map(io::read_matrix).transpose().map_err(to_runtime)?;
            let labels = match &f.labels {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| BenchError::Runtime(format!("{}: {e}", p.display())))?;
                    Some(io::parse_labels(&text).map_err(to_runtime)?)
                }
                None => None,
            };
            if let Some(x) = &x {
                if x.shape() != xhat.shape() {
                    return Err(BenchError::Runtime(format!("truth {:?} and observation {:?} differ in shape", x.shape(), xhat.shape())));
                }
            }
            if let Some(l) = &labels {
                if l.len() != xhat.rows() {
                    return Err(BenchError::Runtime(format!("{} labels for {} rows", l.len(), xhat.rows())));
                }
            }
            Some(FileData { xhat, x, labels })
        } else {
            None
        };
        Ok(Scenario { cfg, files })
    }

    pub fn config(&self) -> &ExperimentConfig {
        self.cfg
    }

    pub fn instance(&self, seed: u64) -> twoinf_core::Result<Instance> {
        let cfg = self.cfg;
        let knobs_or = |derived: KnobValues| cfg.knobs.unwrap_or(derived);
        match cfg.scenario {
            ScenarioKind::Gaussian => {
                let p = &cfg.gaussian;
                let g = gen_gaussian_mixture(&p.scenario(seed))?;
                let rates = gaussian_rate_profile(p.n, p.m, p.r, p.sigma, p.theta, 1.0)?;
                let knobs = KnobValues { eps1: rates.eps1, eps2: rates.eps2, t_eps1: rates.eps1, t_eps2: rates.eps2 };
                let constants = vec![
                    ("n".into(), p.n as f64),
                    ("m".into(), p.m as f64),
                    ("r".into(), p.r as f64),
                    ("theta".into(), p.theta),
                    ("sigma".into(), p.sigma),
                    ("d_r".into(), g.d[p.r - 1]),
                    ("balance".into(), g.model.balance()),
                ];
                Ok(Instance {
                    obs: Observation::Rect { xhat: g.xhat, x: Some(g.x) },
                    r: p.r,
                    model: Some(g.model),
                    truth_basis: Some(g.u),
                    knobs: knobs_or(knobs),
                    constants,
                })
            }
            ScenarioKind::SbmSlice => {
                let p = &cfg.sbm;
                let model = SbmModel::assortative(p.n, p.r, p.b, p.rho, p.sample_size, seed)?;
                let s = gen_sbm_slice(&model)?;
                let d_r = s.d[p.r - 1];
                let (e1, e2) = bernstein_knobs(d_r, p.rho, 1.0, p.n)?;
                let constants = vec![
                    ("n".into(), p.n as f64),
                    ("sample_size".into(), p.sample_size as f64),
                    ("r".into(), p.r as f64),
                    ("b".into(), p.b),
                    ("rho".into(), p.rho),
                    ("d_r".into(), d_r),
                    ("balance".into(), s.model.balance()),
                ];
                Ok(Instance {
                    obs: Observation::Rect { xhat: s.xhat, x: Some(s.x) },
                    r: p.r,
                    model: Some(s.model),
                    truth_basis: Some(s.u),
                    knobs: knobs_or(KnobValues { eps1: e1, eps2: e2, t_eps1: e1, t_eps2: e2 }),
                    constants,
                })
            }
            ScenarioKind::Multilayer => {
                let p = &cfg.multilayer;
                let model = MultilayerModel::random(p.n, p.layers, p.ranks.clone(), p.rho, seed)?;
                let inst = gen_multilayer(&model)?;
                let truth = inst.x_gram();
                let r = p.ranks.len();
                let basis = leading_eigs(&truth, r)?.basis().clone();
                let constants = vec![
                    ("n".into(), p.n as f64),
                    ("layers".into(), p.layers as f64),
                    ("groups".into(), r as f64),
                    ("rho".into(), p.rho),
                    ("balance".into(), inst.model.balance()),
                ];
                Ok(Instance {
                    obs: Observation::Gram { hat: inst.xhat_gram(), truth: Some(truth) },
                    r,
                    model: Some(inst.model),
                    truth_basis: Some(basis),
                    knobs: knobs_or(KnobValues::default()),
                    constants,
                })
            }
            ScenarioKind::MatrixFiles => {
                let f = self.files.as_ref().expect("files loaded");
                let r = cfg.files.r;
                let model = f.labels.as_ref().map(|l| ClusterModel::new(l.clone(), r, None)).transpose()?;
                let (obs, truth_basis) = if cfg.files.symmetric {
                    let basis = f.x.as_ref().map(|y| leading_eigs(y, r)).transpose()?.map(|p| p.basis().clone());
                    (Observation::Gram { hat: f.xhat.clone(), truth: f.x.clone() }, basis)
                } else {
                    let basis = f.x.as_ref().map(|x| svd_r(x, r)).transpose()?.map(|p| p.basis().clone());
                    (Observation::Rect { xhat: f.xhat.clone(), x: f.x.clone() }, basis)
                };
                Ok(Instance {
                    obs,
                    r,
                    model,
                    truth_basis,
                    knobs: cfg.knobs.unwrap_or_default(),
                    constants: vec![("rows".into(), f.xhat.rows() as f64), ("cols".into(), f.xhat.cols() as f64)],
                })
            }
        }
    }
}

/// Outcome of one bound on one (replicate, mode).
#[derive(Clone, Debug)]
pub struct BoundOutcome {
    pub bound: BoundId,
    pub report: Result<BoundReport, String>,
    /// The error the bound speaks about: sin-theta for Davis-Kahan,
    /// the aligned two-to-infinity error otherwise.
    pub empirical: Option<f64>,
}

impl BoundOutcome {
    /// `empirical / value`; absent when the bound is zero or missing.
    pub fn ratio(&self) -> Option<f64> {
        match (&self.report, self.empirical) {
            (Ok(rep), Some(e)) if rep.value > 0.0 => Some(e / rep.value),
            _ => None,
        }
    }

    pub fn violated(&self) -> bool {
        match (&self.report, self.empirical) {
            (Ok(rep), Some(e)) => rep.constant_explicit && rep.preconditions_met && e > rep.value,
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModeOutcome {
    pub zhat: Vec<usize>,
    pub objective: f64,
    pub two_inf_error: Option<f64>,
    pub sin_theta: Option<f64>,
    pub miscluster: Option<usize>,
    pub certificate: Option<Certificate>,
    pub audit: Option<KMeansAudit>,
    pub bounds: Vec<BoundOutcome>,
}

/// One CSV row.
#[derive(Clone, Debug)]
pub struct ReplicateRow {
    pub replicate: u64,
    pub seed: u64,
    pub mode: ClusteringMode,
    pub n: usize,
    pub outcome: Result<ModeOutcome, String>,
}

impl ReplicateRow {
    pub fn ok(&self) -> Option<&ModeOutcome> {
        self.outcome.as_ref().ok()
    }

    pub fn bound(&self, id: BoundId) -> Option<&BoundOutcome> {
        self.ok()?.bounds.iter().find(|b| b.bound == id)
    }
}

/// Profiles shared by the bounds of one mode, computed on first use.
struct Profiles<'i> {
    inst: &'i Instance,
    mode: ClusteringMode,
    sym: Option<twoinf_core::Result<(SymErrorProfile, f64)>>,
    rect: Option<twoinf_core::Result<(SpectralPair, NonsymErrorProfile)>>,
    symmetrized: Option<twoinf_core::Result<SymmetrizedProfile>>,
}

fn clone_err(e: &twoinf_core::Error) -> String {
    e.to_string()
}

impl<'i> Profiles<'i> {
    fn new(inst: &'i Instance, mode: ClusteringMode) -> Self {
        Profiles { inst, mode, sym: None, rect: None, symmetrized: None }
    }

    /// Profile of `Yhat - Y` and `||Yhat - Y||`.
    fn sym(&mut self) -> Result<&(SymErrorProfile, f64), String> {
        if self.sym.is_none() {
            let (inst, mode) = (self.inst, self.mode);
            let compute = || -> twoinf_core::Result<(SymErrorProfile, f64)> {
                let (y, yhat) = match &inst.obs {
                    Observation::Rect { xhat, x } => {
                        let x = x.as_ref().ok_or_else(|| twoinf_core::Error::Domain("no truth matrix".into()))?;
                        (x.gram(), symmetrize_estimate(xhat, mode.hollow()))
                    }
                    Observation::Gram { hat, truth } => {
                        let y = truth.clone().ok_or_else(|| twoinf_core::Error::Domain("no truth matrix".into()))?;
                        let yhat = if mode.hollow() { hollow(hat)? } else { hat.clone() };
                        (y, yhat)
                    }
                };
                let e = yhat.sub(&y)?;
                let pair = leading_eigs(&y, inst.r)?;
                Ok((sym_error_profile_with(&pair, &e)?, spectral_norm(&e)?))
            };
            self.sym = Some(compute());
        }
        self.sym.as_ref().unwrap().as_ref().map_err(clone_err)
    }

    fn rect(&mut self) -> Result<&(SpectralPair, NonsymErrorProfile), String> {
        if self.rect.is_none() {
            let inst = self.inst;
            let compute = || -> twoinf_core::Result<(SpectralPair, NonsymErrorProfile)> {
                let Observation::Rect { xhat, x: Some(x) } = &inst.obs else {
                    return Err(twoinf_core::Error::Domain("needs a rectangular observation with truth".into()));
                };
                let pair = svd_r(x, inst.r)?;
                let np = nonsym_error_profile_with(&pair, &xhat.sub(x)?)?;
                Ok((pair, np))
            };
            self.rect = Some(compute());
        }
        self.rect.as_ref().unwrap().as_ref().map_err(clone_err)
    }

    fn symmetrized(&mut self) -> Result<(SymmetrizedProfile, NonsymErrorProfile), String> {
        let (pair, np) = self.rect()?.clone();
        if self.symmetrized.is_none() {
            let (inst, hollow_flag) = (self.inst, self.mode.hollow());
            let compute = || -> twoinf_core::Result<SymmetrizedProfile> {
                let Observation::Rect { xhat, x: Some(x) } = &inst.obs else { unreachable!() };
                let split = error_split(x, xhat, hollow_flag)?;
                symmetrized_profile_with(&pair, x, &split, hollow_flag)
            };
            self.symmetrized = Some(compute());
        }
        let sp = self.symmetrized.as_ref().unwrap().as_ref().map_err(clone_err)?;
        Ok((sp.clone(), np))
    }
}

fn evaluate_bound(b: BoundId, prof: &mut Profiles, knobs: &AssumptionKnobs, r: usize) -> Result<BoundReport, String> {
    let s = |e: twoinf_core::Error| e.to_string();
    match b {
        BoundId::DavisKahan => {
            let (p, norm) = prof.sym()?;
            davis_kahan_bound(p, SinThetaFlavor::Spectral, *norm).map_err(s)
        }
        BoundId::SymTwoInf => sym_two_inf_bound(&prof.sym()?.0).map_err(s),
        BoundId::RankR => rank_r_sym_bound(&prof.sym()?.0).map_err(s),
        BoundId::SymRefined => sym_refined_bound(&prof.sym()?.0, knobs, r).map_err(s),
        BoundId::Nonsym => nonsym_two_inf_bound(&prof.rect()?.1, knobs).map_err(s),
        BoundId::Symmetrized => {
            let (sp, np) = prof.symmetrized()?;
            symmetrized_two_inf_bound(&sp, &np, knobs).map_err(s)
        }
        BoundId::SymmetrizedRefined => {
            let (sp, np) = prof.symmetrized()?;
            symmetrized_refined_bound(&sp, &np, knobs, r).map_err(s)
        }
    }
}

/// Embeds, clusters and scores one mode.
pub fn evaluate_mode(
    inst: &Instance,
    mode: ClusteringMode,
    cfg: &ExperimentConfig,
    kmeans_seed: u64,
) -> twoinf_core::Result<ModeOutcome> {
    let r = inst.r;
    let pair = match &inst.obs {
        Observation::Rect { xhat, .. } => embed(xhat, r, mode)?,
        Observation::Gram { hat, .. } => embed_gram(hat, r, mode)?,
    };
    let uhat = pair.basis();
    let params = KMeansParams { restarts: cfg.kmeans.restarts, max_iters: cfg.kmeans.max_iters, seed: kmeans_seed };
    let res = approx_kmeans(uhat, r, &params)?;

    let mut out = ModeOutcome {
        zhat: res.zhat,
        objective: res.objective,
        two_inf_error: None,
        sin_theta: None,
        miscluster: None,
        certificate: None,
        audit: None,
        bounds: Vec::new(),
    };
    if let Some(model) = &inst.model {
        out.miscluster = Some(miscluster_count(&out.zhat, model.labels(), r)?);
    }
    if let Some(u) = &inst.truth_basis {
        out.two_inf_error = Some(aligned_two_inf_error(u, uhat)?);
        out.sin_theta = Some(sin_theta(u, uhat, SinThetaFlavor::Spectral)?);
        if let Some(model) = &inst.model {
            out.certificate = perfect_clustering_certificate(uhat, u, model).ok();
            let aligned = u.matmul(&procrustes_align(u, uhat)?)?;
            out.audit = abbe_fan_audit(uhat, &aligned, model, &out.zhat, cfg.kmeans.a).ok();
        }
    }

    let knobs = AssumptionKnobs {
        eps1: inst.knobs.eps1,
        eps2: inst.knobs.eps2,
        t_eps1: inst.knobs.t_eps1,
        t_eps2: inst.knobs.t_eps2,
        generic_constant: 1.0,
    };
    let gram = matches!(inst.obs, Observation::Gram { .. });
    let mut prof = Profiles::new(inst, mode);
    for &b in cfg.bounds.iter().filter(|&&b| bound_applies(b, mode, gram)) {
        let report = evaluate_bound(b, &mut prof, &knobs, r);
        let empirical = if b == BoundId::DavisKahan { out.sin_theta } else { out.two_inf_error };
        out.bounds.push(BoundOutcome { bound: b, report, empirical });
    }
    Ok(out)
}

/// All mode rows for one replicate. Generation failures become error rows.
pub fn run_replicate(scenario: &Scenario, replicate: u64, seed: u64) -> Vec<ReplicateRow> {
    let cfg = scenario.config();
    let kmeans_seed = derive_seed(seed, KMEANS_STREAM);
    match scenario.instance(seed) {
        Ok(inst) => cfg
            .modes
            .iter()
            .map(|&mode| ReplicateRow {
                replicate,
                seed,
                mode,
                n: inst.rows(),
                outcome: evaluate_mode(&inst, mode, cfg, kmeans_seed).map_err(|e| e.to_string()),
            })
            .collect(),
        Err(e) => cfg
            .modes
            .iter()
            .map(|&mode| ReplicateRow { replicate, seed, mode, n: 0, outcome: Err(format!("generation: {e}")) })
            .collect(),
    }
}

/// Replicate `k` of a run uses seed `derive_seed(master_seed, k)`.
pub fn replicate_seeds(master_seed: u64, replicates: usize) -> Vec<(u64, u64)> {
    (0..replicates as u64).map(|k| (k, derive_seed(master_seed, k))).collect()
}

/// Runs `(replicate, seed)` jobs on a pool of `threads` workers; rows come
/// back sorted by `(replicate, mode)` whatever the scheduling.
pub fn run_jobs(scenario: &Scenario, jobs: &[(u64, u64)], threads: usize) -> Result<Vec<ReplicateRow>, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| BenchError::Runtime(format!("thread pool: {e}")))?;
    let mut rows: Vec<ReplicateRow> =
        pool.install(|| jobs.par_iter().flat_map_iter(|&(k, seed)| run_replicate(scenario, k, seed)).collect());
    rows.sort_by_key(|r| (r.replicate, r.mode));
    Ok(rows)
}

pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<ReplicateRow>, BenchError> {
    let scenario = Scenario::new(cfg)?;
    run_jobs(&scenario, &replicate_seeds(cfg.master_seed, cfg.replicates), threads)
}

//! Writing an instance to matrix files with a JSON metadata sidecar.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use twoinf_core::clustering::ClusteringMode;
use twoinf_core::io;

use crate::config::ExperimentConfig;
use crate::runner::{Instance, Observation};
use crate::BenchError;

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub scenario: String,
    pub seed: u64,
    /// SHA-256 of the resolved config in TOML form.
    pub config_sha256: String,
    /// `rect` for `Xhat`/`X`, `gram` for symmetric `Yhat`/`Y`.
    pub representation: &'static str,
    pub rank: usize,
    pub cluster_sizes: Option<Vec<usize>>,
    pub constants: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn io_err(e: impl std::fmt::Display) -> BenchError {
    BenchError::Runtime(e.to_string())
}

/// Writes the observation, truth, labels and metadata into `dir` (created
/// if missing). `estimates` are optional clustering outputs per mode.
pub fn dump_instance(
    dir: &Path,
    cfg: &ExperimentConfig,
    seed: u64,
    inst: &Instance,
    estimates: &[(ClusteringMode, Vec<usize>)],
) -> Result<Metadata, BenchError> {
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut files = Vec::new();
    let put_matrix = |name: &str, m: &twoinf_core::DenseMatrix, files: &mut Vec<String>| -> Result<(), BenchError> {
        io::write_matrix(dir.join(name), m).map_err(io_err)?;
        files.push(name.to_string());
        Ok(())
    };
    let representation = match &inst.obs {
        Observation::Rect { xhat, x } => {
            put_matrix("xhat.csv", xhat, &mut files)?;
            if let Some(x) = x {
                put_matrix("x.csv", x, &mut files)?;
            }
            "rect"
        }
        Observation::Gram { hat, truth } => {
            put_matrix("yhat.csv", hat, &mut files)?;
            if let Some(y) = truth {
                put_matrix("y.csv", y, &mut files)?;
            }
            "gram"
        }
    };
    if let Some(u) = &inst.truth_basis {
        put_matrix("u.csv", u, &mut files)?;
    }
    let mut put_labels = |name: String, labels: &[usize]| -> Result<(), BenchError> {
        std::fs::write(dir.join(&name), io::format_labels(labels)).map_err(io_err)?;
        files.push(name);
        Ok(())
    };
    if let Some(model) = &inst.model {
        put_labels("labels.txt".into(), model.labels())?;
    }
    for (mode, zhat) in estimates {
        put_labels(format!("zhat-{}.txt", mode.key()), zhat)?;
    }
    files.push("meta.json".into());
    let meta = Metadata {
        scenario: cfg.scenario.to_string(),
        seed,
        config_sha256: config_digest(cfg),
        representation,
        rank: inst.r,
        cluster_sizes: inst.model.as_ref().map(|m| m.sizes().to_vec()),
        constants: inst.constants.iter().cloned().collect(),
        files,
    };
    let json = serde_json::to_string_pretty(&meta).map_err(io_err)?;
    std::fs::write(dir.join("meta.json"), json + "\n").map_err(io_err)?;
    Ok(meta)
}

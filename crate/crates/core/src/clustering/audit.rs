use serde::Serialize;

use super::{best_label_map, ClusterModel};
use crate::linalg::{aligned_two_inf_error, spectral_norm, two_inf_norm};
use crate::{DenseMatrix, Error, Result};

/// Check of the approximate k-means mismatch guarantee on one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KMeansAudit {
    /// Minimum distance between distinct true rows.
    pub separation: f64,
    /// `L(B, z)`: squared distance of the embedding rows to their true rows.
    pub objective: f64,
    pub a: f64,
    /// Smallest `delta` satisfying the guarantee's hypothesis; the conclusion is
    /// sharpest there. Feasible iff below `separation / 2`.
    pub slack: f64,
    pub hypothesis_holds: bool,
    /// `L / (s/2 - delta)^2`, when the hypothesis holds.
    pub mismatch_bound: Option<f64>,
    /// Best label map, true label -> estimated label.
    pub permutation: Vec<usize>,
    pub mismatch_set: Vec<usize>,
    /// Points at distance `>= s/2 - delta` from their true row.
    pub certified_superset: Vec<usize>,
    /// `|mismatch_set| <= mismatch_bound` (vacuously true without the hypothesis).
    pub conclusion_holds: bool,
    pub mismatch_within_superset: bool,
    /// Upper bound `2 r ||Uhat - U W_U||^2` on `objective` and the smallest
    /// `delta` it certifies.
    pub objective_spectral_route: f64,
    pub slack_spectral_route: f64,
}

fn min_slack(objective: f64, r: usize, n_min: usize, a: f64) -> f64 {
    (1.0 + (1.0 + a).sqrt()) * (r as f64 * objective / n_min as f64).sqrt()
}

/// Audits k-means labels `zhat` computed from `uhat` against the aligned
/// truth `aligned = U W_U`.
pub fn abbe_fan_audit(
    uhat: &DenseMatrix,
    aligned: &DenseMatrix,
    model: &ClusterModel,
    zhat: &[usize],
    a: f64,
) -> Result<KMeansAudit> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("approximation factor a must be positive, got {a}")));
    }
    if uhat.shape() != aligned.shape() || uhat.rows() != model.n() {
        return Err(Error::dim(format!(
            "embedding {:?}, truth {:?}, model with {} points",
            uhat.shape(),
            aligned.shape(),
            model.n()
        )));
    }
    let r = model.r();
    let z = model.labels();
    let d = aligned.cols();
    let mut b = vec![vec![0.0; d]; r];
    for (i, &k) in z.iter().enumerate() {
        for (j, v) in b[k].iter_mut().enumerate() {
            *v += aligned[(i, j)] / model.sizes()[k] as f64;
        }
    }
    let dist = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let mut separation = f64::INFINITY;
    for k in 0..r {
        for l in k + 1..r {
            let s = dist(&b[k], &b[l]);
            if s <= 1e-12 {
                return Err(Error::DegenerateSeparation(k, l));
            }
            separation = separation.min(s);
        }
    }
    let row_err: Vec<f64> = (0..model.n()).map(|i| dist(&uhat.row(i), &b[z[i]])).collect();
    let objective: f64 = row_err.iter().map(|e| e * e).sum();

    let slack = min_slack(objective, r, model.n_min(), a);
    let hypothesis_holds = slack < separation / 2.0;
    let radius = separation / 2.0 - slack;
    let mismatch_bound = hypothesis_holds.then(|| objective / (radius * radius));

    let permutation = best_label_map(zhat, z, r)?;
    let mismatch_set: Vec<usize> = (0..model.n()).filter(|&i| zhat[i] != permutation[z[i]]).collect();
    let certified_superset: Vec<usize> = if hypothesis_holds {
        (0..model.n()).filter(|&i| row_err[i] >= radius).collect()
    } else {
        (0..model.n()).collect()
    };
    let conclusion_holds = mismatch_bound.is_none_or(|bound| mismatch_set.len() as f64 <= bound);
    let mismatch_within_superset = mismatch_set.iter().all(|i| certified_superset.binary_search(i).is_ok());

    let diff = uhat.sub(aligned)?;
    let objective_spectral_route = 2.0 * r as f64 * spectral_norm(&diff)?.powi(2);
    Ok(KMeansAudit {
        separation,
        objective,
        a,
        slack,
        hypothesis_holds,
        mismatch_bound,
        permutation,
        mismatch_set,
        certified_superset,
        conclusion_holds,
        mismatch_within_superset,
        objective_spectral_route,
        slack_spectral_route: min_slack(objective_spectral_route, r, model.n_min(), a),
    })
}

/// Outcome of the sufficient condition for perfect clustering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub fired: bool,
    /// `||Uhat - U W_U||_{2,inf}`
    pub error: f64,
    /// `eps_U / (2 sqrt(2) c0)`
    pub threshold: f64,
    pub margin: f64,
    /// Whether `U` has equal rows within clusters and rows at least
    /// `sqrt(2 / n_max)` apart across clusters.
    pub separation_ok: bool,
}

/// Applies the threshold to a precomputed aligned error. Non-strict: an
/// error equal to the threshold certifies.
pub fn certify_error(error: f64, eps_u: f64, c0: f64) -> (bool, f64, f64) {
    let threshold = eps_u / (2.0 * std::f64::consts::SQRT_2 * c0);
    (error <= threshold, threshold, threshold - error)
}

fn separation_ok(u: &DenseMatrix, model: &ClusterModel) -> bool {
    let z = model.labels();
    let mut reps: Vec<Option<Vec<f64>>> = vec![None; model.r()];
    for i in 0..model.n() {
        let row = u.row(i);
        match &reps[z[i]] {
            Some(rep) => {
                if rep.iter().zip(&row).any(|(p, q)| (p - q).abs() > 1e-9) {
                    return false;
                }
            }
            None => reps[z[i]] = Some(row),
        }
    }
    let floor = (2.0 / model.n_max() as f64).sqrt() - 1e-9;
    let reps: Vec<Vec<f64>> = reps.into_iter().map(Option::unwrap).collect();
    (0..reps.len()).all(|k| {
        (k + 1..reps.len()).all(|l| {
            let d2: f64 = reps[k].iter().zip(&reps[l]).map(|(p, q)| (p - q) * (p - q)).sum();
            d2.sqrt() >= floor
        })
    })
}

pub fn perfect_clustering_certificate(uhat: &DenseMatrix, u: &DenseMatrix, model: &ClusterModel) -> Result<Certificate> {
    if u.rows() != model.n() {
        return Err(Error::dim(format!("basis has {} rows, model has {} points", u.rows(), model.n())));
    }
    let error = aligned_two_inf_error(u, uhat)?;
    let (fired, threshold, margin) = certify_error(error, two_inf_norm(u)?, model.balance());
    Ok(Certificate { fired, error, threshold, margin, separation_ok: separation_ok(u, model) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_orthogonal;
    use crate::rng::rng_from_seed;

    fn truth() -> (DenseMatrix, ClusterModel) {
        let model = ClusterModel::new(vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 2], 3, None).unwrap();
        let o = random_orthogonal(&mut rng_from_seed(3), 3);
        (model.normalized_membership().matmul(&o).unwrap(), model)
    }

    #[test]
    fn exact_embedding() {
        let (u, model) = truth();
        let audit = abbe_fan_audit(&u, &u, &model, model.labels(), 0.5).unwrap();
        assert!(audit.objective < 1e-28);
        assert!(audit.hypothesis_holds);
        assert!(audit.mismatch_bound.unwrap() < 1e-27);
        assert!(audit.mismatch_set.is_empty() && audit.certified_superset.is_empty());
        assert!((audit.separation - (1.0f64 / 3.0 + 1.0 / 4.0).sqrt()).abs() < 1e-12);

        let cert = perfect_clustering_certificate(&u, &u, &model).unwrap();
        assert!(cert.fired && cert.separation_ok);
        assert!(cert.error < 1e-12 && (cert.margin - cert.threshold).abs() < 1e-12);
    }

    #[test]
    fn displaced_row_enters_superset() {
        let per = 400;
        let model = ClusterModel::new((0..3 * per).map(|i| i / per).collect(), 3, None).unwrap();
        let u = model.normalized_membership();
        let a = 0.5;
        let s = abbe_fan_audit(&u, &u, &model, model.labels(), a).unwrap().separation;
        // one displaced row of length t gives slack c * t
        let c = (1.0 + (1.0 + a).sqrt()) * (3.0 / per as f64).sqrt();
        let t = s / (2.0 * (1.0 + c)) + 1e-6;
        let mut shifted = u.as_nalgebra().clone();
        shifted[(7, 2)] += t;
        let uhat = DenseMatrix::from_nalgebra(shifted).unwrap();
        let audit = abbe_fan_audit(&uhat, &u, &model, model.labels(), a).unwrap();
        assert!((audit.objective - t * t).abs() < 1e-15);
        assert!((audit.slack - c * t).abs() < 1e-12);
        assert!(audit.hypothesis_holds);
        assert_eq!(audit.certified_superset, vec![7]);
        assert!(audit.conclusion_holds);
    }

    #[test]
    fn mismatch_guarantee_on_small_noise() {
        let (u, model) = truth();
        let mut rng = rng_from_seed(4);
        let noise = crate::linalg::random::gaussian_matrix(&mut rng, 10, 3, 0.01);
        let uhat = u.add(&noise).unwrap();
        let labels = super::super::approx_kmeans(&uhat, 3, &Default::default()).unwrap().zhat;
        let audit = abbe_fan_audit(&uhat, &u, &model, &labels, 0.5).unwrap();
        assert!(audit.hypothesis_holds && audit.conclusion_holds && audit.mismatch_within_superset);
        assert!(audit.objective <= audit.objective_spectral_route + 1e-15);
    }

    #[test]
    fn duplicate_true_rows_are_rejected() {
        let model = ClusterModel::new(vec![0, 1], 2, None).unwrap();
        let u = DenseMatrix::from_row_major(2, 1, &[1.0, 1.0]).unwrap();
        assert!(matches!(abbe_fan_audit(&u, &u, &model, &[0, 1], 1.0), Err(Error::DegenerateSeparation(0, 1))));
    }

    #[test]
    fn certificate_boundary_is_inclusive() {
        let (fired, threshold, margin) = certify_error(0.25, 1.0, 1.0 / (2.0 * std::f64::consts::SQRT_2));
        assert_eq!(threshold, 1.0);
        assert!(certify_error(threshold, 1.0, 1.0 / (2.0 * std::f64::consts::SQRT_2)).0);
        assert!(fired && margin == 0.75);
        assert!(!certify_error(1.0 + 1e-12, 1.0, 1.0 / (2.0 * std::f64::consts::SQRT_2)).0);
    }
}

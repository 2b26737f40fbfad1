//! Lanczos with full reorthogonalization for a few extreme eigenpairs of a
//! symmetric operator given only through products. Meant for sampled
//! graphs, whose leading eigenvalues are simple; a single Krylov sequence
//! cannot see more than one copy of a repeated eigenvalue.

use nalgebra::DMatrix;
use rand::Rng as _;

use super::decomp::{sort_order, EigenOrdering};
use crate::rng::rng_from_seed;

/// Ritz residuals must fall below this multiple of the largest Ritz value.
const RESIDUAL_TOL: f64 = 1e-12;

/// Steps between convergence checks.
const CHECK_EVERY: usize = 8;

/// Returns `count + 1` eigenvalues in the requested order and the
/// eigenvectors of the first `count`, or `None` when the Krylov space runs
/// out or `max_steps` pass without convergence.
pub(crate) fn leading_pairs(
    n: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    count: usize,
    ordering: EigenOrdering,
    max_steps: usize,
) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let wanted = count + 1;
    let max_steps = max_steps.min(n);
    if wanted > max_steps {
        return None;
    }
    // fixed start so results are reproducible
    let mut rng = rng_from_seed(0x1A2C_205E);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut start)?;

    let mut basis: Vec<Vec<f64>> = vec![start];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![0.0; n];
    for step in 0..max_steps {
        apply(&basis[step], &mut w);
        let a = dot(&basis[step], &w);
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = norm(&w);
        let k = step + 1;
        let exhausted = b <= f64::EPSILON * alpha.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if k >= wanted && (k % CHECK_EVERY == 0 || exhausted || k == max_steps) {
            let t = DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
                0 => alpha[i],
                1 => beta[i.min(j)],
                _ => 0.0,
            });
            let eig = t.symmetric_eigen();
            let order = sort_order(eig.eigenvalues.as_slice(), ordering);
            let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
            let converged = exhausted
                || order[..wanted].iter().all(|&i| (b * eig.eigenvectors[(k - 1, i)]).abs() <= RESIDUAL_TOL * scale);
            if converged {
                if exhausted && k < n {
                    // invariant subspace: eigenvalues outside it were never seen
                    return None;
                }
                let values = order[..wanted].iter().map(|&i| eig.eigenvalues[i]).collect();
                let q = DMatrix::from_fn(n, k, |i, j| basis[j][i]);
                let s = DMatrix::from_fn(k, count, |i, j| eig.eigenvectors[(i, order[j])]);
                return Some((values, q * s));
            }
        }
        if exhausted {
            return None;
        }
        beta.push(b);
        let mut next = std::mem::replace(&mut w, vec![0.0; n]);
        next.iter_mut().for_each(|v| *v /= b);
        basis.push(next);
    }
    None
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) -> Option<()> {
    let s = norm(a);
    (s > 0.0).then(|| a.iter_mut().for_each(|v| *v /= s))
}

//! Selected eigenpairs of a dense symmetric matrix.
//!
//! Householder reduction to tridiagonal form, Sturm-sequence bisection for
//! the wanted eigenvalues, inverse iteration on the tridiagonal for their
//! vectors and a back-transformation. Avoids the cubic cost of
//! accumulating every eigenvector when only a handful are needed.

use nalgebra::linalg::SymmetricTridiagonal;
use nalgebra::DMatrix;

use super::EigenOrdering;

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    pivmin: f64,
    norm: f64,
}

impl Tridiagonal {
    fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        let n = diag.len();
        let mut norm = 0.0f64;
        for i in 0..n {
            let mut row = diag[i].abs();
            if i > 0 {
                row += off[i - 1].abs();
            }
            if i + 1 < n {
                row += off[i].abs();
            }
            norm = norm.max(row);
        }
        let max_off2 = off.iter().map(|e| e * e).fold(0.0, f64::max);
        let pivmin = f64::MIN_POSITIVE * max_off2.max(1.0);
        Tridiagonal { diag, off, pivmin, norm }
    }

    fn len(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < self.pivmin {
            q = -self.pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection.
    fn kth_smallest(&self, k: usize) -> f64 {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        let pad = 2.0 * f64::EPSILON * self.norm.max(self.pivmin) + self.pivmin;
        lo -= pad;
        hi += pad;
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin;
            if hi - lo <= tol || mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T - shift I) x = b` in place by LU with partial pivoting.
    /// Tiny pivots are replaced by `tiny`, as usual for inverse iteration.
    fn shifted_solve(&self, shift: f64, b: &mut [f64], tiny: f64) {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - shift;
            b[0] /= if d.abs() < tiny { tiny.copysign(d) } else { d };
            return;
        }
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = tiny.copysign(d[i]);
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = tiny.copysign(d[n - 1]);
        }
        for i in 0..n - 1 {
            if swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }

    fn eigenvector(&self, lambda: f64, start: usize, cluster: &[Vec<f64>]) -> Vec<f64> {
        let n = self.len();
        let tiny = (f64::EPSILON * self.norm).max(self.pivmin);
        // deterministic, index-dependent starting vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (start as f64 + 1.618_033_988_75)).sin())
            .collect();
        for _ in 0..6 {
            self.shifted_solve(lambda, &mut x, tiny);
            for v in cluster {
                let dot: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi -= dot * vi;
                }
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                x = (0..n).map(|i| if i == start % n { 1.0 } else { 0.0 }).collect();
                continue;
            }
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }
}

/// Leading eigenpairs of a symmetric matrix.
///
/// Returns `count + 1` eigenvalues in the requested order (the last one is
/// the first value left out, when `count < n`) and the `n x count` matrix of
/// eigenvectors for the first `count` of them.
pub(crate) fn leading_pairs(
    m: DMatrix<f64>,
    count: usize,
    ordering: EigenOrdering,
) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let tri = SymmetricTridiagonal::new(m);
    let q = tri.q();
    let t = Tridiagonal::new(tri.diagonal().as_slice().to_vec(), tri.off_diagonal().as_slice().to_vec());
    let wanted = (count + 1).min(n);

    // (algebraic rank from the bottom, value)
    let mut picked: Vec<(usize, f64)> = (0..wanted).map(|k| (n - 1 - k, t.kth_smallest(n - 1 - k))).collect();
    if ordering == EigenOrdering::Magnitude {
        for k in 0..wanted {
            if !picked.iter().any(|p| p.0 == k) {
                picked.push((k, t.kth_smallest(k)));
            }
        }
        picked.sort_by(|a, b| {
            b.1.abs()
                .partial_cmp(&a.1.abs())
                .unwrap()
                .then(b.1.partial_cmp(&a.1).unwrap())
        });
        picked.truncate(wanted);
    }

    let cluster_tol = 1e-3 * t.norm.max(f64::MIN_POSITIVE);
    let mut tri_vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (idx, &(_, lambda)) in picked.iter().take(count).enumerate() {
        let cluster: Vec<Vec<f64>> = picked[..idx]
            .iter()
            .zip(&tri_vectors)
            .filter(|(p, _)| (p.1 - lambda).abs() <= cluster_tol)
            .map(|(_, v)| v.clone())
            .collect();
        tri_vectors.push(t.eigenvector(lambda, idx, &cluster));
    }
    let x = DMatrix::from_fn(n, count, |i, j| tri_vectors[j][i]);
    (picked.into_iter().map(|p| p.1).collect(), q * x)
}

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ClusterResult;
use crate::rng::{child_rng, Rng};
use crate::{DenseMatrix, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansParams {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams { restarts: 20, max_iters: 100, seed: 0 }
    }
}

struct Points {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Points {
    fn new(rows: &DenseMatrix) -> Self {
        Points { data: rows.to_row_major(), n: rows.rows(), d: rows.cols() }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Distance-proportional ("++") seeding.
fn seed_centers(pts: &Points, r: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![pts.row(rng.random_range(0..pts.n)).to_vec()];
    let mut best: Vec<f64> = (0..pts.n).map(|i| dist2(pts.row(i), &centers[0])).collect();
    while centers.len() < r {
        let total: f64 = best.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = pts.n - 1;
            for (i, w) in best.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            // every point coincides with a center already
            rng.random_range(0..pts.n)
        };
        let c = pts.row(pick).to_vec();
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.min(dist2(pts.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.iter().enumerate() {
        let d = dist2(point, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

fn means(pts: &Points, labels: &[usize], r: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; pts.d]; r];
    let mut counts = vec![0usize; r];
    for (i, &k) in labels.iter().enumerate() {
        counts[k] += 1;
        for (s, x) in sums[k].iter_mut().zip(pts.row(i)) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

fn objective(pts: &Points, labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    labels.iter().enumerate().map(|(i, &k)| dist2(pts.row(i), &centers[k])).sum()
}

struct Refined {
    labels: Vec<usize>,
    centers: Vec<Vec<f64>>,
    objective: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    history: Vec<f64>,
}

/// Lloyd iterations from the given centers. Empty clusters take over the
/// point farthest from its own center. The objective never increases.
fn refine(pts: &Points, mut centers: Vec<Vec<f64>>, max_iters: usize) -> Refined {
    let r = centers.len();
    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    for _ in 0..max_iters.max(1) {
        let mut next = Vec::with_capacity(pts.n);
        let mut dists = Vec::with_capacity(pts.n);
        for i in 0..pts.n {
            let (k, d) = nearest(pts.row(i), &centers);
            next.push(k);
            dists.push(d);
        }
        let mut counts = vec![0usize; r];
        next.iter().for_each(|&k| counts[k] += 1);
        for k in 0..r {
            if counts[k] > 0 {
                continue;
            }
            let far = (0..pts.n)
                .filter(|&i| counts[next[i]] > 1)
                .max_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap().then(b.cmp(&a)))
                .expect("n >= r leaves a cluster with two points");
            counts[next[far]] -= 1;
            counts[k] = 1;
            next[far] = k;
            dists[far] = 0.0;
        }
        centers = means(pts, &next, r);
        let obj = objective(pts, &next, &centers);
        if let Some(&prev) = history.last() {
            debug_assert!(obj <= prev * (1.0 + 1e-12) + 1e-300, "k-means objective increased: {prev} -> {obj}");
        }
        history.push(obj);
        let done = next == labels;
        labels = next;
        if done {
            break;
        }
    }
    let objective = *history.last().unwrap();
    Refined { labels, centers, objective, history }
}

/// Best of `restarts` seeded Lloyd runs. Restart `k` draws from the stream
/// derived from `(seed, k)`, so the result does not depend on scheduling.
pub fn approx_kmeans(rows: &DenseMatrix, r: usize, params: &KMeansParams) -> Result<ClusterResult> {
    let n = rows.rows();
    if r == 0 || r > n {
        return Err(Error::Infeasible(format!("cannot form {r} clusters from {n} points")));
    }
    if params.restarts == 0 {
        return Err(Error::Domain("restarts must be at least 1".into()));
    }
    let pts = Points::new(rows);
    let mut best: Option<Refined> = None;
    for k in 0..params.restarts {
        let mut rng = child_rng(params.seed, k as u64);
        let run = refine(&pts, seed_centers(&pts, r, &mut rng), params.max_iters);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.unwrap();
    let centers = DenseMatrix::from_fn(r, pts.d, |k, j| best.centers[k][j])?;
    Ok(ClusterResult {
        zhat: best.labels,
        centers,
        objective: best.objective,
        restarts_used: params.restarts,
        mode: None,
    })
}

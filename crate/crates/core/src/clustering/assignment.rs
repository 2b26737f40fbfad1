use crate::{Error, Result};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(r^3)). Returns `assign[row] = col`.
fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays with a virtual column 0
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

fn confusion(zhat: &[usize], z: &[usize], r: usize) -> Result<Vec<Vec<i64>>> {
    if zhat.len() != z.len() {
        return Err(Error::dim(format!("label vectors differ in length: {} vs {}", zhat.len(), z.len())));
    }
    let mut counts = vec![vec![0i64; r]; r];
    for (i, (&a, &b)) in zhat.iter().zip(z).enumerate() {
        if a >= r || b >= r {
            return Err(Error::Domain(format!("label at position {i} is out of range for r = {r}")));
        }
        counts[b][a] += 1;
    }
    Ok(counts)
}

/// Label map `phi` (true label -> estimated label) maximizing agreement.
pub fn best_label_map(zhat: &[usize], z: &[usize], r: usize) -> Result<Vec<usize>> {
    let counts = confusion(zhat, z, r)?;
    let cost: Vec<Vec<i64>> = counts.iter().map(|row| row.iter().map(|c| -c).collect()).collect();
    Ok(min_cost_assignment(&cost))
}

/// Number of points misclassified under the best relabeling.
pub fn miscluster_count(zhat: &[usize], z: &[usize], r: usize) -> Result<usize> {
    let counts = confusion(zhat, z, r)?;
    let cost: Vec<Vec<i64>> = counts.iter().map(|row| row.iter().map(|c| -c).collect()).collect();
    let phi = min_cost_assignment(&cost);
    let matched: i64 = phi.iter().enumerate().map(|(k, &j)| counts[k][j]).sum();
    Ok(z.len() - matched as usize)
}

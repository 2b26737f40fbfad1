//! Interval estimates for Monte Carlo frequencies.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`; `(0, 1)` when
/// there are no trials.
pub fn wilson(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Paired comparison of two per-replicate error measures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedComparison {
    pub pairs: usize,
    /// Replicates where the first measure is strictly smaller.
    pub wins: usize,
    pub losses: usize,
    pub mean_first: f64,
    pub mean_second: f64,
    /// Wilson interval for the win share among untied pairs.
    pub win_share: (f64, f64),
}

impl PairedComparison {
    pub fn new(first: &[f64], second: &[f64]) -> Self {
        assert_eq!(first.len(), second.len());
        let pairs = first.len();
        let wins = first.iter().zip(second).filter(|(a, b)| a < b).count();
        let losses = first.iter().zip(second).filter(|(a, b)| a > b).count();
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        PairedComparison {
            pairs,
            wins,
            losses,
            mean_first: mean(first),
            mean_second: mean(second),
            win_share: wilson(wins, wins + losses, Z95),
        }
    }

    /// The first measure is smaller on average and the interval for the
    /// win share excludes an even split.
    pub fn first_better(&self) -> bool {
        self.mean_first < self.mean_second && self.win_share.0 > 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 8/10 at 95%: (0.4902, 0.9433), as tabulated by Newcombe (1998)
        let (lo, hi) = wilson(8, 10, Z95);
        assert!((lo - 0.4902).abs() < 1e-4 && (hi - 0.9433).abs() < 1e-4);
        let (lo, hi) = wilson(0, 20, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.1611).abs() < 1e-4);
        assert_eq!(wilson(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn paired_comparison() {
        let a = [0.0, 0.1, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let b = [0.3, 0.2, 0.0, 0.4, 0.1, 0.2, 0.3, 0.1, 0.5, 0.2, 0.1, 0.1];
        let c = PairedComparison::new(&a, &b);
        assert_eq!((c.wins, c.losses, c.pairs), (11, 0, 12));
        assert!(c.first_better());
        assert!(!PairedComparison::new(&b, &a).first_better());
        assert!(!PairedComparison::new(&a, &a).first_better());
    }
}

//! Property tests: norm and subspace inequalities, bound monotonicity,
//! the symmetrized error decomposition and the k-means oracle.

use proptest::prelude::*;
use twoinf_core::bounds::{
    error_split, nonsym_two_inf_bound, rank_r_sym_bound, sym_two_inf_bound, symmetrize_estimate, AssumptionKnobs,
    NonsymErrorProfile, SymErrorProfile,
};
use twoinf_core::clustering::{approx_kmeans, miscluster_count, KMeansParams};
use twoinf_core::linalg::random::{gaussian_matrix, random_orthonormal};
use twoinf_core::linalg::{
    frobenius_norm, hollow, one_inf_norm, procrustes_align, sin_theta, spectral_norm, two_inf_norm, SinThetaFlavor,
};
use twoinf_core::rng::rng_from_seed;
use twoinf_core::DenseMatrix;

const SLACK: f64 = 1e-9;

fn perturbed(seed: u64, n: usize, r: usize, t: f64) -> (DenseMatrix, DenseMatrix) {
    let mut rng = rng_from_seed(seed);
    let u = random_orthonormal(&mut rng, n, r);
    let g = gaussian_matrix(&mut rng, n, r, t);
    let q = (u.as_nalgebra() + g.as_nalgebra()).qr().q();
    (u, DenseMatrix::from_nalgebra(q.columns(0, r).into_owned()).unwrap())
}

fn sym_profile() -> impl Strategy<Value = SymErrorProfile> {
    (1usize..6, 0.0..0.25f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.01..1.0f64, 0.0..0.9f64).prop_map(
        |(rank, delta0, delta1_inf, delta2_inf, delta_eu, eps_u, tail)| SymErrorProfile {
            rank,
            delta0,
            delta1_inf,
            delta2_inf,
            delta_eu,
            eps_u,
            lam_r: 1.0,
            lam_r1: tail,
            c_lam: 1.0 - tail,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sandwich_and_alignment_relations(seed in any::<u64>(), n in 6usize..40, r in 1usize..5, log_t in -5.0..1.0f64) {
        prop_assume!(r < n);
        let (u, uhat) = perturbed(seed, n, r, 10f64.powf(log_t));
        let s = sin_theta(&u, &uhat, SinThetaFlavor::Spectral).unwrap();
        let w = procrustes_align(&u, &uhat).unwrap();
        let diff = uhat.sub(&u.matmul(&w).unwrap()).unwrap();
        let d_sp = spectral_norm(&diff).unwrap();
        prop_assert!(s <= d_sp + SLACK && d_sp <= std::f64::consts::SQRT_2 * s + SLACK);

        let cross = u.transpose().matmul(&uhat).unwrap();
        prop_assert!(spectral_norm(&cross.sub(&w).unwrap()).unwrap() <= s * s + SLACK);
        let proj = uhat.sub(&u.matmul(&cross).unwrap()).unwrap();
        prop_assert!((spectral_norm(&proj).unwrap() - s).abs() <= SLACK);
        let defect = DenseMatrix::identity(r).sub(&cross.transpose().matmul(&cross).unwrap()).unwrap();
        prop_assert!((spectral_norm(&defect).unwrap() - s * s).abs() <= SLACK);

        let f = sin_theta(&u, &uhat, SinThetaFlavor::Frobenius).unwrap();
        prop_assert!(s <= f + SLACK && f <= (r as f64).sqrt() * s + SLACK);
    }

    #[test]
    fn norm_dominance_chain(seed in any::<u64>(), rows in 1usize..30, cols in 1usize..30, inner in 1usize..10) {
        let mut rng = rng_from_seed(seed);
        let a = gaussian_matrix(&mut rng, rows, inner, 1.0);
        let b = gaussian_matrix(&mut rng, inner, cols, 1.0);
        let two_inf = two_inf_norm(&a).unwrap();
        let spec = spectral_norm(&a).unwrap();
        prop_assert!(two_inf <= spec + SLACK);
        prop_assert!(spec <= frobenius_norm(&a).unwrap() + SLACK);
        prop_assert!(two_inf <= one_inf_norm(&a).unwrap() + SLACK);
        prop_assert!(spec <= (rows as f64).sqrt() * two_inf + SLACK);
        let ab = a.matmul(&b).unwrap();
        prop_assert!(two_inf_norm(&ab).unwrap() <= two_inf * spectral_norm(&b).unwrap() + SLACK);
        prop_assert!(two_inf_norm(&ab).unwrap() <= one_inf_norm(&a).unwrap() * two_inf_norm(&b).unwrap() + SLACK);
    }

    #[test]
    fn hollowing_contracts(seed in any::<u64>(), n in 1usize..25) {
        let mut rng = rng_from_seed(seed);
        let a = gaussian_matrix(&mut rng, n, n, 1.0);
        let h = hollow(&a).unwrap();
        prop_assert!(spectral_norm(&h).unwrap() <= 2.0 * spectral_norm(&a).unwrap() + SLACK);
        prop_assert!(two_inf_norm(&h).unwrap() <= two_inf_norm(&a).unwrap());
        prop_assert!(one_inf_norm(&h).unwrap() <= one_inf_norm(&a).unwrap());
    }

    #[test]
    fn explicit_bound_is_monotone(p in sym_profile(), bump in 0.0..0.5f64, which in 0usize..4) {
        let mut q = p;
        match which {
            0 => q.delta0 = (p.delta0 + bump).min(0.25),
            1 => q.delta2_inf += bump,
            2 => q.delta_eu += bump,
            _ => q.eps_u += bump,
        }
        let (a, b) = (sym_two_inf_bound(&p).unwrap().value, sym_two_inf_bound(&q).unwrap().value);
        prop_assert!(a <= b, "{a} > {b}");
        let smaller_gap = SymErrorProfile { lam_r1: p.lam_r1 + (1.0 - p.lam_r1) * bump, c_lam: (1.0 - p.lam_r1) * (1.0 - bump), ..p };
        prop_assert!(a <= sym_two_inf_bound(&smaller_gap).unwrap().value);

        let exact = SymErrorProfile { lam_r1: 0.0, c_lam: 1.0, ..p };
        let more = SymErrorProfile { delta1_inf: exact.delta1_inf + bump, ..exact };
        prop_assert!(rank_r_sym_bound(&exact).unwrap().value <= rank_r_sym_bound(&more).unwrap().value);
    }

    #[test]
    fn rectangular_bound_is_monotone(
        base in proptest::collection::vec(0.0..0.25f64, 6),
        bump in 0.0..0.5f64,
        which in 0usize..5,
        c in 0.1..10.0f64,
    ) {
        let p = NonsymErrorProfile {
            rank: 2,
            t_delta0: base[0],
            t_delta_1inf: base[1],
            t_delta_2inf: base[1],
            t_delta_1inf_t: base[2],
            t_delta_2inf_t: base[2],
            t_delta_v_1inf: base[3],
            t_delta_v_2inf: base[3],
            t_delta_u0: base[4],
            t_delta0_v: base[4],
            t_delta_uv0: base[5],
            d_r: 1.0,
            d_r1: 0.5,
            eps_u: 0.3,
            eps_v: 0.3,
        };
        let mut q = p;
        match which {
            0 => q.t_delta0 = (p.t_delta0 + bump).min(0.25),
            1 => q.t_delta_2inf += bump,
            2 => q.t_delta_v_2inf += bump,
            3 => q.t_delta_uv0 += bump,
            _ => q.d_r1 = (p.d_r1 + bump).min(0.99),
        }
        let k = AssumptionKnobs { generic_constant: c, ..Default::default() };
        prop_assert!(nonsym_two_inf_bound(&p, &k).unwrap().value <= nonsym_two_inf_bound(&q, &k).unwrap().value);
        let k2 = AssumptionKnobs { generic_constant: 2.0 * c, ..k };
        let (v1, v2) = (nonsym_two_inf_bound(&p, &k).unwrap().value, nonsym_two_inf_bound(&p, &k2).unwrap().value);
        prop_assert!((v2 - 2.0 * v1).abs() <= 1e-12 * v2.max(1.0));
    }

    #[test]
    fn error_split_reassembles(seed in any::<u64>(), n in 2usize..15, m in 1usize..15, hollowed in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let x = gaussian_matrix(&mut rng, n, m, 1.0);
        let xhat = x.add(&gaussian_matrix(&mut rng, n, m, 0.5)).unwrap();
        let split = error_split(&x, &xhat, hollowed).unwrap();
        let direct = symmetrize_estimate(&xhat, hollowed).sub(&x.gram()).unwrap();
        let gap = split.total().sub(&direct).unwrap();
        prop_assert!(gap.as_nalgebra().amax() <= 1e-10 * direct.as_nalgebra().amax().max(1.0));
        prop_assert!(split.xi_x.transpose() == split.x_xi);
    }

    #[test]
    fn kmeans_within_factor_of_exhaustive(seed in any::<u64>(), n in 2usize..8, r in 1usize..4, d in 1usize..3) {
        prop_assume!(r <= n);
        let mut rng = rng_from_seed(seed);
        let pts = gaussian_matrix(&mut rng, n, d, 1.0);
        let res = approx_kmeans(&pts, r, &KMeansParams { seed, ..Default::default() }).unwrap();
        let opt = exhaustive(&pts, r);
        prop_assert!(res.objective <= 1.5 * opt + 1e-12, "{} vs {opt}", res.objective);
    }

    #[test]
    fn miscluster_count_ignores_relabelling(labels in proptest::collection::vec(0usize..4, 1..40), shift in 0usize..4) {
        let relabelled: Vec<usize> = labels.iter().map(|&k| (k + shift) % 4).collect();
        prop_assert_eq!(miscluster_count(&relabelled, &labels, 4).unwrap(), 0);
        let mut one_off = relabelled.clone();
        one_off[0] = (one_off[0] + 1) % 4;
        prop_assert!(miscluster_count(&one_off, &labels, 4).unwrap() <= 1);
    }
}

fn exhaustive(pts: &DenseMatrix, r: usize) -> f64 {
    let n = pts.rows();
    let mut best = f64::INFINITY;
    for code in 0..r.pow(n as u32) {
        let labels: Vec<usize> = (0..n).map(|i| code / r.pow(i as u32) % r).collect();
        let mut total = 0.0;
        for k in 0..r {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == k).collect();
            if members.is_empty() {
                continue;
            }
            for c in 0..pts.cols() {
                let mean = members.iter().map(|&i| pts.get(i, c)).sum::<f64>() / members.len() as f64;
                total += members.iter().map(|&i| (pts.get(i, c) - mean).powi(2)).sum::<f64>();
            }
        }
        best = best.min(total);
    }
    best
}

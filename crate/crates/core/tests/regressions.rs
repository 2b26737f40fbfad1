use twoinf_core::generators::{gen_sbm_slice, SbmModel};
use twoinf_core::linalg::svd_r;

/// The expected slice for this seed is exactly rank 2 and used to stall the
/// bidiagonal SVD iteration.
#[test]
fn exact_rank_sbm_slice_decomposes() {
    let model = SbmModel::assortative(4096, 2, 0.2, 1.0 / 64.0, 64, 1).unwrap();
    let s = gen_sbm_slice(&model).unwrap();
    let p = svd_r(&s.x, 2).unwrap();
    let (d1, d2) = (p.spectrum()[0], p.spectrum()[1]);
    assert!(d1 >= d2 && d2 > 0.0);
    assert!(p.next_value().abs() <= 1e-10 * d2, "{}", p.next_value());
    let gap = s.x.sub(&p.reconstruct()).unwrap();
    assert!(gap.as_nalgebra().amax() <= 1e-10 * s.x.as_nalgebra().amax());
}

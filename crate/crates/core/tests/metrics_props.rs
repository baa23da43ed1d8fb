//! Property suites for the loading-matrix metrics, checked against
//! nalgebra eigen and singular value decompositions.

use ndarray::{s, Array2};
use proptest::prelude::*;
use scotlass::metrics::{
    covariance_factor, max_correlation, non_orthogonality, pev, rre, sparsity,
};
use scotlass_testkit as tk;
use tk::nalgebra::DMatrix;

const CASES: u32 = 1000;

fn to_nd(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Data `A` (m × n, m ≥ n) and its right singular vectors `V` (n × n).
fn data_and_basis() -> impl Strategy<Value = (Array2<f64>, Array2<f64>, Vec<f64>)> {
    (3usize..10, 0usize..8, any::<u64>()).prop_map(|(n, extra, seed)| {
        let mut rng = tk::rng(seed);
        let a = tk::gaussian_matrix(&mut rng, n + extra, n);
        let (sv, v) = tk::svd_desc(&a);
        (to_nd(&a), to_nd(&v), sv)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn nested_columns_are_monotone((a, _v, _) in data_and_basis(), seed in any::<u64>()) {
        let n = a.ncols();
        let mut rng = tk::rng(seed);
        // an arbitrary (non-orthogonal) loading matrix
        let w = to_nd(&tk::gaussian_matrix(&mut rng, n, n));
        let mut last_pev = 0.0;
        let mut last_rre = f64::INFINITY;
        for r in 1..=n {
            let vr = w.slice(s![.., ..r]);
            let (Ok(p), Ok(e)) = (pev(a.view(), vr), rre(a.view(), vr)) else { break };
            prop_assert!(p >= last_pev - 1e-10, "pev {p} after {last_pev}");
            prop_assert!(e <= last_rre + 1e-10, "rre {e} after {last_rre}");
            last_pev = p;
            last_rre = e;
        }
    }

    #[test]
    fn pythagoras_for_orthonormal_loadings((a, v, _) in data_and_basis(), r in 1usize..10) {
        let r = r.min(v.ncols());
        let vr = v.slice(s![.., ..r]);
        let p = pev(a.view(), vr).unwrap() / 100.0;
        let e = rre(a.view(), vr).unwrap();
        prop_assert!((e * e + p - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn orthonormal_loadings_are_permutation_invariant((a, v, _) in data_and_basis(), r in 2usize..10, seed in any::<u64>()) {
        let r = r.min(v.ncols());
        let mut order: Vec<usize> = (0..r).collect();
        let mut rng = tk::rng(seed);
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let vr = v.slice(s![.., ..r]).to_owned();
        let vp = Array2::from_shape_fn(vr.dim(), |(i, j)| vr[[i, order[j]]]);
        prop_assert!((pev(a.view(), vr.view()).unwrap() - pev(a.view(), vp.view()).unwrap()).abs() <= 1e-10);
        prop_assert!((rre(a.view(), vr.view()).unwrap() - rre(a.view(), vp.view()).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn svd_basis_matches_tail_formula((a, v, sv) in data_and_basis(), r in 1usize..10) {
        let r = r.min(v.ncols());
        let e = rre(a.view(), v.slice(s![.., ..r])).unwrap();
        let total: f64 = sv.iter().map(|x| x * x).sum();
        let tail: f64 = sv.iter().skip(r).map(|x| x * x).sum();
        prop_assert!((e - (tail / total).sqrt()).abs() <= 1e-8);
        let full = pev(a.view(), v.view()).unwrap();
        prop_assert!((full - 100.0).abs() <= 1e-6);
        // principal components are orthogonal with uncorrelated scores on centred data
        prop_assert!(non_orthogonality(v.view()).unwrap() <= 1e-6);
    }

    #[test]
    fn sparsity_counts_exactly(vals in prop::collection::vec(prop_oneof![Just(0.0), Just(1e-9), Just(-1e-9), -1.0..1.0f64], 1..60)) {
        let n = vals.len();
        let m = Array2::from_shape_vec((n, 1), vals.clone()).unwrap();
        let (frac, count) = sparsity(m.view(), 1e-8);
        let expect = vals.iter().filter(|x| x.abs() > 1e-8).count();
        prop_assert_eq!(count, expect);
        prop_assert_eq!(frac, expect as f64 / n as f64);
    }

    #[test]
    fn covariance_factor_reproduces_sigma((a, _v, _) in data_and_basis()) {
        let sigma = a.t().dot(&a);
        let f = covariance_factor(sigma.view()).unwrap();
        let back = f.t().dot(&f);
        let scale = sigma.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in back.iter().zip(sigma.iter()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
        for c in f.columns() {
            prop_assert!(c.sum().abs() <= 1e-10 * (1.0 + scale));
        }
    }
}

#[test]
fn pca_scores_are_uncorrelated_on_centred_data() {
    let mut rng = tk::rng(5);
    let g = tk::gaussian_matrix(&mut rng, 40, 6);
    let mean = g.row_mean();
    let c = DMatrix::from_fn(40, 6, |i, j| g[(i, j)] - mean[j]);
    let (_, v) = tk::svd_desc(&c);
    let rho = max_correlation(to_nd(&c).view(), to_nd(&v).view()).unwrap();
    assert!(rho <= 1e-10, "{rho}");
}

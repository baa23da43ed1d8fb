//! Property suites for the generators and matrix I/O.

use ndarray::Array2;
use proptest::prelude::*;
use scotlass::datagen::{
    gen_bnw_counterexample, gen_hastie, gen_random, hastie_covariance, lift_to_vector, read_matrix,
    write_matrix, HastieData, HastieMode, HastieSpec,
};
use scotlass::proj::{bnw_unguarded, mbnw_profile, mbnw_root, qasb_root};
use scotlass::RootConfig;
use scotlass_testkit as tk;
use tk::nalgebra::DMatrix;

const CASES: u32 = 1000;

fn slopes() -> Vec<f64> {
    (1..=40).map(|i| -0.25 * i as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generators_are_deterministic(m in 1usize..20, n in 2usize..20, seed in any::<u64>()) {
        let a = gen_random(m, n, seed).unwrap();
        let b = gen_random(m, n, seed).unwrap();
        prop_assert!(a.view().iter().zip(b.view().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let spec = HastieSpec { n_samples: 3 + m, seed, mode: HastieMode::Sampled };
        let (HastieData::Sampled(h1), HastieData::Sampled(h2)) = (gen_hastie(&spec).unwrap(), gen_hastie(&spec).unwrap()) else {
            panic!("sampled mode");
        };
        prop_assert!(h1.view().iter().zip(h2.view().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn csv_round_trip_is_exact(m in 1usize..8, n in 2usize..8, seed in any::<u64>(), scale in -300i32..300) {
        let a = gen_random(m, n, seed).unwrap().into_inner().mapv(|x| x * 10f64.powi(scale));
        let mut buf = Vec::new();
        write_matrix(&mut buf, a.view()).unwrap();
        let b: Array2<f64> = read_matrix(buf.as_slice()).unwrap();
        prop_assert_eq!(a.dim(), b.dim());
        prop_assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn counterexamples_are_valid(a2 in 2usize..6, b2 in 5.0..20.0f64, spread in 0.0..1.0f64, t in 1.2..2.5f64) {
        // c2 from the validity inequality b2² ≤ a2 c2, λ̃2 in the top piece
        let c2 = b2 * b2 / a2 as f64 * (1.0 + spread);
        let lam2 = b2 / a2 as f64 * 0.5;
        let Ok(inst) = gen_bnw_counterexample(a2, b2, c2, lam2, t, &slopes(), &(a2 + 1..=40).collect::<Vec<_>>()) else {
            return Ok(());
        };
        let (p1, p2) = (inst.piece1(), inst.piece2());
        prop_assert!(p1.sum * p1.sum <= p1.count as f64 * p1.sum_sq * (1.0 + 1e-12));
        prop_assert!(p2.sum * p2.sum <= p2.count as f64 * p2.sum_sq * (1.0 + 1e-12));
        prop_assert!(inst.loop_residual().unwrap().abs() <= 1e-8);
    }
}

#[test]
fn hastie_covariance_is_psd_with_block_structure() {
    let s = hastie_covariance();
    let m = DMatrix::from_fn(10, 10, |i, j| s.view()[[i, j]]);
    assert!((m.clone() - m.transpose()).amax() == 0.0);
    let (vals, vecs) = tk::sym_eigen_desc(&m);
    assert!(*vals.last().unwrap() >= -1e-10);
    // within each block of four the top two eigenvectors load equally with
    // one sign; the dominant block differs between them
    let block_level = |c: usize, lo: usize| -> f64 {
        let first = vecs[(lo, c)];
        for i in lo..lo + 4 {
            assert!((vecs[(i, c)] - first).abs() <= 1e-10, "column {c} row {i}");
        }
        first.abs()
    };
    let (a1, b1) = (block_level(0, 0), block_level(0, 4));
    let (a2, b2) = (block_level(1, 0), block_level(1, 4));
    assert!((a1 > b1) != (a2 > b2), "{a1} {b1} {a2} {b2}");
}

#[test]
fn example_instance_reproduces_the_cycle() {
    let inst = gen_bnw_counterexample(2, 9.0, 41.0, 4.0, 2.0, &[-1.0], &[10]).unwrap();
    assert_eq!((inst.b1, inst.c1), (33.0, 109.0));
    let model = inst.to_model().unwrap();
    let report = bnw_unguarded(&model, inst.t, 40).unwrap();
    assert_eq!(
        report.cycle_pair.map(|(a, b)| (a.min(b), a.max(b))),
        Some((3.0, 4.0))
    );
    let fixed = mbnw_profile(&model, inst.t, &RootConfig::default()).unwrap();
    assert!(fixed.iterations <= 50);
    assert!(lift_to_vector(&inst).is_err());
}

#[test]
fn lifted_vector_realizes_both_pieces() {
    // liftable instances are rare; this one came out of a parameter scan
    let slopes: Vec<f64> = (1..=80).map(|i| -0.125 * i as f64).collect();
    let inst = gen_bnw_counterexample(2, 9.0, 42.525, 2.25, 1.5, &slopes, &[4]).unwrap();
    let v = lift_to_vector(&inst).unwrap();
    let u = v.to_vec();
    for (level, piece) in [
        (inst.tilde_lambda2, inst.piece2()),
        (inst.tilde_lambda1, inst.piece1()),
    ] {
        let above: Vec<f64> = u.iter().copied().filter(|&x| x > level).collect();
        assert_eq!(above.len(), piece.count);
        assert!((above.iter().sum::<f64>() - piece.sum).abs() <= 1e-9);
        assert!((above.iter().map(|x| x * x).sum::<f64>() - piece.sum_sq).abs() <= 1e-9);
    }
    let mut s = u.clone();
    s.sort_by(|a, b| b.total_cmp(a));
    assert!(s[0] > s[1] && tk::norm1(&u) > inst.t * tk::norm2(&u));
    let cfg = RootConfig::default();
    let q = qasb_root(v.view(), inst.t, (0.0, s[1]), &cfg).unwrap();
    let m = mbnw_root(v.view(), inst.t, &cfg).unwrap();
    assert!((q.root - m.root).abs() <= 1e-8);
}

//! Property suites for the GP and AN solvers and deflation.

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use scotlass::proj::Projector;
use scotlass::solvers::{
    an_solve_one, deflate, deflate_covariance, gp_solve_one, spca, StopMask, StopReason,
};
use scotlass::{
    AnConfig, ConstraintSet, Covariance, DataMatrix, GpConfig, Method, SetKind, SolverConfig,
    SpcaInput,
};
use scotlass_testkit as tk;

const CASES: u32 = 1000;

const KINDS: [SetKind; 3] = [
    SetKind::Ball1Ball2,
    SetKind::Sphere1Sphere2,
    SetKind::Ball1Sphere2,
];

/// Gaussian data (m × n, seed) and a radius in `(1, √n)`.
fn instance() -> impl Strategy<Value = (Array2<f64>, f64)> {
    (4usize..16, 3usize..12, any::<u64>(), 0.05..0.95f64).prop_map(|(m, n, seed, f)| {
        let mut rng = tk::rng(seed);
        let a = tk::gaussian_matrix(&mut rng, m, n);
        let a = Array2::from_shape_fn((m, n), |(i, j)| a[(i, j)]);
        let t = 1.0 + f * ((n as f64).sqrt() - 1.0);
        (a, t)
    })
}

fn covariance(a: &Array2<f64>) -> Covariance<f64> {
    DataMatrix::new(a.clone()).unwrap().covariance()
}

fn lambda_max(s: &Covariance<f64>) -> f64 {
    let n = s.dim();
    let m = tk::nalgebra::DMatrix::from_fn(n, n, |i, j| s.view()[[i, j]]);
    tk::sym_eigen_desc(&m).0[0]
}

fn start(n: usize) -> Array1<f64> {
    let mut x = Array1::zeros(n);
    x[0] = 1.0;
    x
}

fn contains(kind: SetKind, t: f64, x: &Array1<f64>) -> bool {
    ConstraintSet::new(kind, t)
        .unwrap()
        .contains(x.view(), 1e-8)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn loadings_are_feasible_and_bounded((a, t) in instance(), r in 1usize..3) {
        let input = SpcaInput::Data(DataMatrix::new(a.clone()).unwrap());
        let lmax = lambda_max(&covariance(&a));
        for method in [Method::Gp, Method::An] {
            for kind in KINDS {
                let res = spca(&input, r, kind, &[t], &SolverConfig::new(method)).unwrap();
                for j in 0..r {
                    let x = res.loadings.column(j).to_owned();
                    prop_assert!(contains(kind, t, &x), "{method:?} {kind:?} column {j}");
                }
                let obj = res.objectives[0];
                prop_assert!(obj >= -1e-8 && obj <= lmax + 1e-8, "objective {obj} vs λmax {lmax}");
            }
        }
    }

    #[test]
    fn gp_fixed_point_contract((a, t) in instance()) {
        let s = covariance(&a);
        let cfg = GpConfig { stop_mask: StopMask::none(), ..GpConfig::default() };
        for kind in KINDS {
            let set = ConstraintSet::new(kind, t).unwrap();
            let (x, trace) = gp_solve_one(&s, set, &cfg, start(a.ncols()).view()).unwrap();
            if trace.converged() {
                prop_assert_eq!(trace.stop_reason, Some(StopReason::FixedPoint));
                let gamma = *trace.step_size.last().unwrap();
                let g = s.view().dot(&x) * 2.0;
                let p = Projector::new(set).project((&x + &(&g * gamma)).view()).unwrap();
                let res = tk::norm2((&p - &x).as_slice().unwrap());
                prop_assert!(res <= cfg.eps, "{kind:?}: residual {res}");
            }
        }
    }

    #[test]
    fn an_steps_satisfy_the_line_search((a, t) in instance(), memory in 1usize..60) {
        let s = covariance(&a);
        let cfg = AnConfig { memory, ..AnConfig::default() };
        for kind in KINDS {
            let set = ConstraintSet::new(kind, t).unwrap();
            let (_, tr) = an_solve_one(&s, set, &cfg, start(a.ncols()).view()).unwrap();
            // entry 0 is the unit-step bootstrap
            for k in 1..tr.objective.len() {
                let f_new = -tr.objective[k];
                let rhs = tr.f_max[k] + tr.step_size[k] / 2.0 * tr.step_norm[k].powi(2);
                let slack = 1e-12 * (1.0 + tr.f_max[k].abs());
                prop_assert!(f_new <= rhs + slack, "{kind:?} step {k}: {f_new} > {rhs}");
                prop_assert!(tr.step_size[k] < 0.0);
            }
        }
    }

    #[test]
    fn an_step_envelope((a, t) in instance(), memory in prop::sample::select(vec![1usize, 6, 50])) {
        let s = covariance(&a);
        let cfg = AnConfig { memory, ..AnConfig::default() };
        for kind in KINDS {
            let set = ConstraintSet::new(kind, t).unwrap();
            let (_, tr) = an_solve_one(&s, set, &cfg, start(a.ncols()).view()).unwrap();
            prop_assert!(envelope_holds(&tr, &cfg), "{kind:?} M = {memory}");
        }
    }

    #[test]
    fn deflation_annihilates_the_loading((a, _t) in instance(), seed in any::<u64>()) {
        let n = a.ncols();
        let mut rng = tk::rng(seed);
        let x = tk::gaussian_vec(&mut rng, n);
        let nx = tk::norm2(&x);
        let x = Array1::from_vec(x) / nx;
        let s = covariance(&a);
        let d = deflate_covariance(&s, x.view()).unwrap();
        let scale = 1.0 + s.view().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in d.view().dot(&x).iter() {
            prop_assert!(v.abs() <= 1e-10 * scale);
        }
        let da = deflate(&DataMatrix::new(a.clone()).unwrap(), x.view()).unwrap();
        for v in da.covariance().view().dot(&x).iter() {
            prop_assert!(v.abs() <= 1e-10 * scale);
        }
    }
}

/// `min_{j<kM} ‖x^{j+1} − x^j‖ ≤ c/√k` with
/// `c = √(2(f(x0) − f*)/|ᾱ|)`, `ᾱ = max(σ α_max / 2, α_max)`.
fn envelope_holds(tr: &scotlass::solvers::SolverTrace<f64>, cfg: &AnConfig<f64>) -> bool {
    let steps = &tr.step_norm;
    if steps.is_empty() {
        return true;
    }
    let f0 = -tr.initial_objective;
    let fstar = -tr.final_objective();
    let abar = (cfg.sigma * cfg.alpha_max / 2.0).max(cfg.alpha_max).abs();
    let c = (2.0 * (f0 - fstar).max(0.0) / abar).sqrt();
    let m = cfg.memory;
    let kmax = steps.len().div_ceil(m);
    (1..=kmax).all(|k| {
        let upto = (k * m).min(steps.len());
        let best = steps[..upto].iter().fold(f64::INFINITY, |a, &b| a.min(b));
        best <= c / (k as f64).sqrt() + 1e-12
    })
}

#[test]
fn p1_and_p3_agree_on_random_instances() {
    // the ℓ2 constraint is active at every maximiser over Ω1
    for seed in 0..10u64 {
        let mut rng = tk::rng(seed);
        let g = tk::gaussian_matrix(&mut rng, 20, 50);
        let a = Array2::from_shape_fn((20, 50), |(i, j)| g[(i, j)]);
        let input = SpcaInput::Data(DataMatrix::new(a).unwrap());
        for method in [Method::Gp, Method::An] {
            let cfg = SolverConfig::new(method);
            let p1 = spca(&input, 1, SetKind::Ball1Ball2, &[2.0], &cfg).unwrap();
            let p3 = spca(&input, 1, SetKind::Ball1Sphere2, &[2.0], &cfg).unwrap();
            assert!(
                (p1.objectives[0] - p3.objectives[0]).abs() <= 1e-6,
                "seed {seed} {method:?}: {} vs {}",
                p1.objectives[0],
                p3.objectives[0]
            );
        }
    }
}

#[test]
fn per_component_radii_are_honoured() {
    let mut rng = tk::rng(3);
    let g = tk::gaussian_matrix(&mut rng, 30, 8);
    let a = Array2::from_shape_fn((30, 8), |(i, j)| g[(i, j)]);
    let input = SpcaInput::Data(DataMatrix::new(a).unwrap());
    let radii = [2.5, 1.1, 1.43];
    let res = spca(
        &input,
        3,
        SetKind::Ball1Sphere2,
        &radii,
        &SolverConfig::new(Method::Gp),
    )
    .unwrap();
    assert_eq!(res.radii, radii.to_vec());
    for (j, &t) in radii.iter().enumerate() {
        let x = res.loadings.column(j).to_owned();
        assert!(contains(SetKind::Ball1Sphere2, t, &x));
    }
    assert!(spca(
        &input,
        3,
        SetKind::Ball1Sphere2,
        &[2.0, 1.5],
        &SolverConfig::new(Method::Gp)
    )
    .is_err());
}

use ndarray::{Array1, ArrayView1};

use super::{
    check_termination, feasible_start, gradient, Covariance, GpConfig, Snapshot, SolverTrace,
    Status, StopReason,
};
use crate::error::Result;
use crate::linalg::norm2;
use crate::proj::{ConstraintSet, Projector};
use crate::scalar::Scalar;

/// Barzilai–Borwein step `⟨s,s⟩/⟨s,y⟩` clamped to `[γ_min, γ_max]`, or
/// `γ_max` when the curvature `⟨s,y⟩` is not positive.
pub fn bb_step_gp<T: Scalar>(s: ArrayView1<'_, T>, y: ArrayView1<'_, T>, cfg: &GpConfig<T>) -> T {
    let b = s.dot(&y);
    if b <= T::zero() {
        return cfg.gamma_max;
    }
    let a = s.dot(&s);
    (a / b).max(cfg.gamma_min).min(cfg.gamma_max)
}

/// Gradient projection with BB steps for one component, using the default
/// QASB-based projector.
pub fn gp_solve_one<T: Scalar>(
    sigma: &Covariance<T>,
    set: ConstraintSet<T>,
    cfg: &GpConfig<T>,
    x0: ArrayView1<'_, T>,
) -> Result<(Array1<T>, SolverTrace<T>)> {
    gp_solve_with(sigma, &Projector::new(set), cfg, x0)
}

/// Gradient projection with an explicit projector.
///
/// Iterates `x ← P(x + γ·2Σx)`. On a fixed-point stop the returned `x` is
/// the point where `‖P(x + γ g) − x‖ ≤ eps` was measured, with the last
/// `γ`; on any other stop it is the newest iterate.
pub fn gp_solve_with<T: Scalar>(
    sigma: &Covariance<T>,
    proj: &Projector<T>,
    cfg: &GpConfig<T>,
    x0: ArrayView1<'_, T>,
) -> Result<(Array1<T>, SolverTrace<T>)> {
    cfg.validate()?;
    let mut cfg = *cfg;
    if cfg.safe_step {
        let lmax = sigma.largest_eigenvalue();
        if lmax > T::zero() {
            let cap = T::lit(0.499) / lmax;
            cfg.gamma_max = cfg.gamma_max.min(cap);
            cfg.gamma_min = cfg.gamma_min.min(cfg.gamma_max * T::lit(0.5));
        }
    }
    let mut x = feasible_start(proj, x0)?;
    let mut g = gradient(sigma, x.view())?;
    let mut f = sigma.quad(x.view());
    let mut gamma = cfg.gamma0.min(cfg.gamma_max);
    let mut trace = SolverTrace::new(f);

    for _ in 0..cfg.max_iter {
        let out = proj.project_detailed((&x + &(&g * gamma)).view())?;
        let x_new = out.x;
        let s = &x_new - &x;
        let residual = norm2(s.view());
        let g_new = gradient(sigma, x_new.view())?;
        let f_new = sigma.quad(x_new.view());

        let prev = Snapshot {
            x: x.view(),
            f,
            g: g.view(),
        };
        let cur = Snapshot {
            x: x_new.view(),
            f: f_new,
            g: g_new.view(),
        };
        let stop = check_termination(&prev, &cur, residual, cfg.eps, cfg.stop_mask);
        if stop == Some(StopReason::FixedPoint) {
            trace.status = Status::Converged;
            trace.stop_reason = stop;
            trace.objective.push(f);
            trace.residual.push(residual);
            trace.step_size.push(gamma);
            trace
                .root_iterations
                .push(out.root.map_or(0, |r| r.iterations));
            trace.step_norm.push(T::zero());
            return Ok((x, trace));
        }

        trace.objective.push(f_new);
        trace.residual.push(residual);
        trace.step_size.push(gamma);
        trace
            .root_iterations
            .push(out.root.map_or(0, |r| r.iterations));
        trace.step_norm.push(residual);
        if stop.is_some() {
            // the criteria compare x_k with x_{k−1}; x_k is the answer
            trace.status = Status::Converged;
            trace.stop_reason = stop;
            return Ok((x_new, trace));
        }

        let yv = &g_new - &g;
        gamma = bb_step_gp(s.view(), yv.view(), &cfg);
        x = x_new;
        g = g_new;
        f = f_new;
    }
    trace.status = Status::IterationLimit;
    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proj::SetKind;
    use ndarray::{array, Array2};

    #[test]
    fn bb_examples() {
        let cfg = GpConfig::<f64>::default();
        assert_eq!(
            bb_step_gp(
                array![1.0_f64, 0.0].view(),
                array![-1.0_f64, 0.0].view(),
                &cfg
            ),
            2.0
        );
        assert_eq!(
            bb_step_gp(
                array![1.0_f64, 2.0].view(),
                array![1.0_f64, 2.0].view(),
                &cfg
            ),
            1.0
        );
        assert_eq!(
            bb_step_gp(
                array![1.0_f64, 0.0].view(),
                array![4.0_f64, 0.0].view(),
                &cfg
            ),
            0.25
        );
    }

    #[test]
    fn dominant_sparse_eigenvector() {
        let s = Covariance::new(Array2::from_diag(&array![4.0_f64, 1.0, 1.0])).unwrap();
        let set = ConstraintSet::new(SetKind::Ball1Sphere2, 1.2).unwrap();
        let (x, tr) = gp_solve_one(
            &s,
            set,
            &GpConfig::default(),
            array![0.8_f64, 0.6, 0.0].view(),
        )
        .unwrap();
        assert!(tr.converged());
        // e1 is feasible (‖e1‖₁ = 1 ≤ 1.2) and optimal; the relative
        // objective test stops once the x2 leak is O(√eps)
        assert_eq!(x[2], 0.0);
        assert!((x[0] - 1.0).abs() < 1e-5 && x[1].abs() < 2e-3, "{x}");
        assert!((s.quad(x.view()) - 4.0).abs() < 1e-5);
    }

    #[test]
    fn isotropic_start_is_fixed() {
        let s = Covariance::new(Array2::<f64>::eye(3)).unwrap();
        let set = ConstraintSet::new(SetKind::Ball1Sphere2, 1.5).unwrap();
        let x0 = array![1.0_f64, 0.0, 0.0];
        let (x, tr) = gp_solve_one(&s, set, &GpConfig::default(), x0.view()).unwrap();
        assert_eq!(x, x0);
        assert_eq!(tr.residual[0], 0.0);
    }
}

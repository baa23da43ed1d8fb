use std::collections::VecDeque;

use ndarray::{Array1, ArrayView1};

use super::{
    check_termination, feasible_start, AnConfig, Covariance, GradientLag, Snapshot, SolverTrace,
    Status, StopReason,
};
use crate::error::Result;
use crate::linalg::norm2;
use crate::proj::{ConstraintSet, Projector};
use crate::scalar::Scalar;

/// Approximate Newton method with BB curvature and a nonmonotone line
/// search for one component, using the default projector.
pub fn an_solve_one<T: Scalar>(
    sigma: &Covariance<T>,
    set: ConstraintSet<T>,
    cfg: &AnConfig<T>,
    x0: ArrayView1<'_, T>,
) -> Result<(Array1<T>, SolverTrace<T>)> {
    an_solve_with(sigma, &Projector::new(set), cfg, x0)
}

/// Approximate Newton with an explicit projector.
///
/// Works on `f = −xᵀΣx` with gradient `g = −2Σx`. Candidates are farthest
/// points `Q(x^{k+1} − g/α)` with `α = σ^j β < 0`, accepted once
/// `f_new ≤ f^max + (α/2)‖x_new − x^{k+1}‖²` where `f^max` is the largest
/// of the last `min(k+1, M)` objective values.
pub fn an_solve_with<T: Scalar>(
    sigma: &Covariance<T>,
    proj: &Projector<T>,
    cfg: &AnConfig<T>,
    x0: ArrayView1<'_, T>,
) -> Result<(Array1<T>, SolverTrace<T>)> {
    cfg.validate()?;
    let neg_grad = |x: &Array1<T>| -> Array1<T> { sigma.view().dot(x) * T::lit(-2.0) };
    let f_of = |x: &Array1<T>| -> T { -sigma.quad(x.view()) };

    let qproj = proj.farthest();
    let x1 = feasible_start(proj, x0)?;
    let g1 = neg_grad(&x1);
    let f1 = f_of(&x1);
    let mut trace = SolverTrace::new(-f1);

    // bootstrap: one projected ascent step with unit length
    let boot = proj.project_detailed((&x1 - &g1).view())?;
    let x2 = boot.x;
    let g2 = neg_grad(&x2);
    let f2 = f_of(&x2);
    let step0 = norm2((&x2 - &x1).view());
    trace.objective.push(-f2);
    trace.residual.push(step0);
    trace.step_size.push(T::one());
    trace
        .root_iterations
        .push(boot.root.map_or(0, |r| r.iterations));
    trace.step_norm.push(step0);
    trace.backtracks.push(0);
    trace.f_max.push(f1);
    if step0 == T::zero() {
        trace.status = Status::Converged;
        trace.stop_reason = Some(StopReason::ZeroStep);
        return Ok((x2, trace));
    }

    let mut history: VecDeque<T> = VecDeque::from(vec![f1, f2]);
    let (mut x_prev, mut g_prev) = (x1, g1);
    let (mut x, mut g, mut f) = (x2, g2, f2);
    let neg_eps = T::lit(-1.0);

    for k in 1..cfg.max_iter {
        let s = &x - &x_prev;
        let yv = &g - &g_prev;
        let a = s.dot(&s);
        if a == T::zero() {
            trace.status = Status::Converged;
            trace.stop_reason = Some(StopReason::ZeroStep);
            return Ok((x, trace));
        }
        let alpha_bb = s.dot(&yv) / a;
        let beta = alpha_bb.max(cfg.alpha_min).min(cfg.alpha_max);

        let window = (k + 1).min(cfg.memory);
        let f_max = history
            .iter()
            .rev()
            .take(window)
            .fold(T::neg_infinity(), |m, &v| m.max(v));
        let g_used = match cfg.gradient_lag {
            GradientLag::Previous => &g_prev,
            GradientLag::Current => &g,
        };

        let mut alpha = beta;
        let mut accepted = None;
        for j in 0..=cfg.max_backtracks {
            if j > 0 {
                alpha = alpha * cfg.sigma;
            }
            let z = &x - &(g_used / alpha);
            let out = qproj.project_detailed(z.view())?;
            let cand = -out.x;
            let d = &cand - &x;
            let d2 = d.dot(&d);
            if d2 == T::zero() {
                trace.status = Status::Converged;
                trace.stop_reason = Some(StopReason::ZeroStep);
                return Ok((x, trace));
            }
            let f_c = f_of(&cand);
            if f_c <= f_max + alpha / T::lit(2.0) * d2 {
                accepted = Some((
                    cand,
                    f_c,
                    d2.sqrt(),
                    j,
                    out.root.map_or(0, |r| r.iterations),
                ));
                break;
            }
        }
        let Some((x_new, f_new, step, backtracks, root_its)) = accepted else {
            trace.status = Status::BacktrackLimit;
            return Ok((x, trace));
        };
        let g_new = neg_grad(&x_new);

        trace.objective.push(-f_new);
        trace.residual.push(step);
        trace.step_size.push(alpha);
        trace.root_iterations.push(root_its);
        trace.step_norm.push(step);
        trace.backtracks.push(backtracks);
        trace.f_max.push(f_max);

        // the stop tests read the maximise-form objective and ascent gradient
        let gp = &g * neg_eps;
        let gn = &g_new * neg_eps;
        let prev = Snapshot {
            x: x.view(),
            f: -f,
            g: gp.view(),
        };
        let cur = Snapshot {
            x: x_new.view(),
            f: -f_new,
            g: gn.view(),
        };
        let reason = check_termination(&prev, &cur, step, cfg.eps, cfg.stop_mask);

        history.push_back(f_new);
        if history.len() > cfg.memory + 1 {
            history.pop_front();
        }
        x_prev = std::mem::replace(&mut x, x_new);
        g_prev = std::mem::replace(&mut g, g_new);
        f = f_new;

        if let Some(reason) = reason {
            trace.status = Status::Converged;
            trace.stop_reason = Some(reason);
            return Ok((x, trace));
        }
    }
    trace.status = Status::IterationLimit;
    Ok((x, trace))
}

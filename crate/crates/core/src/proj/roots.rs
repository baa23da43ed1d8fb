//! Root finders for φ / Ψ: the quadratic-approximation secant bisection
//! method (QASB), the cycle-guarded bisection-Newton method (MBNW) and the
//! unguarded bisection-Newton baseline kept for demonstrating its cycle.

use ndarray::ArrayView1;
use serde::Serialize;

use super::aux::{closed_form_root, psi_fun_deriv};
use super::profile::{Profile, SortedProfile};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerances shared by the root finders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootConfig<T> {
    /// Bracket width tolerance.
    pub delta1: T,
    /// Residual tolerance on φ.
    pub delta2: T,
    pub max_iter: usize,
    /// Cycle guard of MBNW: a Newton iterate within `cycle_eps` of the
    /// iterate two steps back is replaced by a bisection step.
    pub cycle_eps: T,
}

impl<T: Scalar> Default for RootConfig<T> {
    fn default() -> Self {
        Self {
            delta1: T::tol(1e-12, 4.0),
            delta2: T::tol(1e-12, 4.0),
            max_iter: 200,
            cycle_eps: T::lit(1e-6),
        }
    }
}

impl<T: Scalar> RootConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta1 > T::zero() && self.delta2 > T::zero() && self.cycle_eps > T::zero()) {
            return Err(Error::InvalidConfig(
                "root tolerances must be positive".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "root max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootResult<T> {
    pub root: T,
    /// `|φ(root)|`.
    pub residual: T,
    pub iterations: usize,
    pub bracket: (T, T),
}

/// QASB on a vector `u ≥ 0` with a bracket where `φ(l) > 0 > φ(r)`.
pub fn qasb_root<T: Scalar>(
    u: ArrayView1<'_, T>,
    t: T,
    bracket: (T, T),
    cfg: &RootConfig<T>,
) -> Result<RootResult<T>> {
    qasb_profile(&SortedProfile::new(u), t, bracket, cfg)
}

/// QASB on any piecewise profile.
///
/// Each step forms the secant point `λ_S` through `(l, φ(l))`, `(r, φ(r))`
/// and the smaller root `λ_Q` of the quadratic piece just right of `l`.
/// If no breakpoint separates `l` from `λ_Q`, `λ_Q` is the exact root.
/// Otherwise the midpoint of the two is tried and all three points shrink
/// the bracket according to their sign.
pub fn qasb_profile<T: Scalar, P: Profile<T> + ?Sized>(
    p: &P,
    t: T,
    bracket: (T, T),
    cfg: &RootConfig<T>,
) -> Result<RootResult<T>> {
    cfg.validate()?;
    let (mut l, mut r) = bracket;
    let mut fl = p.phi(l, t);
    let mut fr = p.phi(r, t);
    if !(l < r && fl > T::zero() && fr < T::zero()) {
        return Err(Error::BadBracket {
            l: l.as_f64(),
            r: r.as_f64(),
            phi_l: fl.as_f64(),
            phi_r: fr.as_f64(),
        });
    }
    let done = |root: T, res: T, it: usize, l: T, r: T| RootResult {
        root,
        residual: res.abs(),
        iterations: it,
        bracket: (l, r),
    };
    for it in 1..=cfg.max_iter {
        let lam_s = l - fl * (r - l) / (fr - fl);
        let lam_s = lam_s.max(l).min(r);

        let piece = p.stats_right_of(l);
        let lam_q = closed_form_root(&piece, t)?.max(l).min(r);
        let fq = p.phi(lam_q, t);
        match p.next_breakpoint_above(l) {
            Some(b) if b < lam_q => {}
            _ => return Ok(done(lam_q, fq, it, l, r)),
        }

        let lam = (lam_s + lam_q) / T::lit(2.0);
        let f = p.phi(lam, t);
        if f.abs() <= cfg.delta2 {
            return Ok(done(lam, f, it, l, r));
        }
        let fs = p.phi(lam_s, t);

        let (old_l, old_r) = (l, r);
        for (x, fx) in [(lam_q, fq), (lam, f), (lam_s, fs)] {
            if fx == T::zero() {
                return Ok(done(x, fx, it, l, r));
            }
            if fx > T::zero() && x > l {
                l = x;
                fl = fx;
            } else if fx < T::zero() && x < r {
                r = x;
                fr = fx;
            }
        }
        if r - l <= cfg.delta1 || (l == old_l && r == old_r) {
            let (x, fx) = if fl.abs() <= fr.abs() {
                (l, fl)
            } else {
                (r, fr)
            };
            return Ok(done(x, fx, it, l, r));
        }
    }
    Err(Error::RootIterationLimit {
        max_iter: cfg.max_iter,
    })
}

/// MBNW on a vector `u ≥ 0` with at least two distinct entries.
pub fn mbnw_root<T: Scalar>(
    u: ArrayView1<'_, T>,
    t: T,
    cfg: &RootConfig<T>,
) -> Result<RootResult<T>> {
    let p = SortedProfile::new(u);
    if p.second_max().is_none() {
        return Err(Error::AllEqual);
    }
    mbnw_profile(&p, t, cfg)
}

/// Bisection-Newton on Ψ over `[0, search_upper]`, guarded against
/// leaving the bracket and against two-cycles, finished by the closed
/// form on the located piece. When `Ψ(0) ≤ 0` the root is non-positive and
/// comes straight from the closed form of the lowest piece.
pub fn mbnw_profile<T: Scalar, P: Profile<T> + ?Sized>(
    p: &P,
    t: T,
    cfg: &RootConfig<T>,
) -> Result<RootResult<T>> {
    cfg.validate()?;
    let psi0 = p.psi_fun(T::zero(), t)?;
    if psi0 <= T::zero() {
        let root = closed_form_root(&p.all_stats(), t)?;
        return Ok(RootResult {
            root,
            residual: p.phi(root, t).abs(),
            iterations: 0,
            bracket: (root, T::zero()),
        });
    }
    let mut lo = T::zero();
    let mut up = p.search_upper();
    let two = T::lit(2.0);
    let mut lam = lo + (up - lo) / two;
    let mut prev: Option<T> = None;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > cfg.max_iter {
            return Err(Error::RootIterationLimit {
                max_iter: cfg.max_iter,
            });
        }
        let psi = p.psi_fun(lam, t)?;
        if psi == T::zero() {
            return Ok(RootResult {
                root: lam,
                residual: p.phi(lam, t).abs(),
                iterations,
                bracket: (lo, up),
            });
        }
        if psi > T::zero() {
            lo = lam;
        } else {
            up = lam;
        }
        if !p.breakpoint_between(lo, up) {
            break;
        }
        let d = psi_fun_deriv(&p.stats_at(lam), lam)?;
        let mut next = lam - psi / d;
        let cycling = matches!(prev, Some(q) if (next - q).abs() <= cfg.cycle_eps);
        if !next.is_finite() || next < lo || next > up || cycling {
            next = lo + (up - lo) / two;
        }
        prev = Some(lam);
        lam = next;
    }
    let root = closed_form_root(&p.stats_right_of(lo), t)?;
    let slack = T::tol(1e-9, 64.0) * T::one().max(up.abs());
    if !(root >= lo - slack && root <= up + slack) {
        return Err(Error::PieceMismatch {
            root: root.as_f64(),
            lo: lo.as_f64(),
            up: up.as_f64(),
        });
    }
    let root = root.max(lo).min(up);
    Ok(RootResult {
        root,
        residual: p.phi(root, t).abs(),
        iterations,
        bracket: (lo, up),
    })
}

/// Trace of the unguarded bisection-Newton method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BnwReport<T> {
    /// Iterates `λ(0), λ(1), …` in order.
    pub history: Vec<T>,
    /// First index `i` with `λ(i) = λ(i−2) ≠ λ(i−1)`.
    pub cycle_detected_at: Option<usize>,
    /// The two alternating values when a cycle was seen.
    pub cycle_pair: Option<(T, T)>,
    /// Number of iterates that repeated the value two steps back.
    pub repeats: usize,
    /// Root from the closed form when the loop ended on its own.
    pub root: Option<T>,
    pub finished: bool,
}

/// The bisection-Newton method without the cycle guard, capped at
/// `max_iter` iterations so its endless loop can be observed safely.
pub fn bnw_unguarded<T: Scalar, P: Profile<T> + ?Sized>(
    p: &P,
    t: T,
    max_iter: usize,
) -> Result<BnwReport<T>> {
    let psi0 = p.psi_fun(T::zero(), t)?;
    if psi0 <= T::zero() {
        let root = closed_form_root(&p.all_stats(), t)?;
        return Ok(BnwReport {
            history: vec![],
            cycle_detected_at: None,
            cycle_pair: None,
            repeats: 0,
            root: Some(root),
            finished: true,
        });
    }
    let two = T::lit(2.0);
    let same = |a: T, b: T| (a - b).abs() <= T::tol(1e-12, 16.0) * T::one().max(a.abs());
    let mut lo = T::zero();
    let mut up = p.search_upper();
    let mut lam = lo + (up - lo) / two;
    let mut report = BnwReport {
        history: vec![lam],
        cycle_detected_at: None,
        cycle_pair: None,
        repeats: 0,
        root: None,
        finished: false,
    };
    for _ in 0..max_iter {
        let psi = p.psi_fun(lam, t)?;
        if psi == T::zero() {
            report.root = Some(lam);
            report.finished = true;
            return Ok(report);
        }
        if psi > T::zero() {
            lo = lam;
        } else {
            up = lam;
        }
        if !p.breakpoint_between(lo, up) {
            report.root = Some(closed_form_root(&p.stats_right_of(lo), t)?);
            report.finished = true;
            return Ok(report);
        }
        let d = psi_fun_deriv(&p.stats_at(lam), lam)?;
        let mut next = lam - psi / d;
        if !next.is_finite() || next < lo || next > up {
            next = lo + (up - lo) / two;
        }
        let h = &report.history;
        let i = h.len();
        if i >= 2 && same(next, h[i - 2]) && !same(next, h[i - 1]) {
            report.repeats += 1;
            if report.cycle_detected_at.is_none() {
                report.cycle_detected_at = Some(i);
                report.cycle_pair = Some((h[i - 1].min(next), h[i - 1].max(next)));
            }
        }
        report.history.push(next);
        lam = next;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proj::aux::phi;
    use crate::proj::profile::PiecewiseModel;
    use ndarray::array;

    fn example_model() -> PiecewiseModel<f64> {
        PiecewiseModel::two_piece((6.0, 2, 9.0, 41.0), (3.5, 10, 33.0, 109.0), 6.0).unwrap()
    }

    fn bisect_phi(u: &[f64], t: f64, mut l: f64, mut r: f64) -> f64 {
        let v = ndarray::Array1::from(u.to_vec());
        for _ in 0..200 {
            let m = 0.5 * (l + r);
            if phi(v.view(), m, t) > 0.0 {
                l = m;
            } else {
                r = m;
            }
        }
        0.5 * (l + r)
    }

    #[test]
    fn qasb_matches_bisection() {
        let u = [3.0, 1.0, 0.5];
        let v = ndarray::Array1::from(u.to_vec());
        let cfg = RootConfig::default();
        let res = qasb_root(v.view(), 1.2, (0.0, 1.0), &cfg).unwrap();
        let oracle = bisect_phi(&u, 1.2, 0.0, 1.0);
        assert!(
            (res.root - oracle).abs() < 1e-8,
            "{} vs {}",
            res.root,
            oracle
        );
    }

    #[test]
    fn qasb_rejects_uniform_bracket() {
        let v = array![1.0_f64, 1.0, 1.0, 1.0];
        let err = qasb_root(v.view(), 1.5, (0.0, 1.0), &RootConfig::default()).unwrap_err();
        assert!(matches!(err, Error::BadBracket { .. }));
    }

    #[test]
    fn example_model_cycles_without_guard() {
        let m = example_model();
        let rep = bnw_unguarded(&m, 2.0, 40).unwrap();
        assert_eq!(&rep.history[..4], &[3.0, 4.0, 3.0, 4.0]);
        assert_eq!(rep.cycle_detected_at, Some(2));
        assert_eq!(rep.cycle_pair, Some((3.0, 4.0)));
        assert!(!rep.finished);
    }

    #[test]
    fn example_model_mbnw_and_qasb_agree() {
        let m = example_model();
        let cfg = RootConfig::default();
        let a = mbnw_profile(&m, 2.0, &cfg).unwrap();
        let b = qasb_profile(&m, 2.0, (0.0, 4.0), &cfg).unwrap();
        let want = (33.0 - 2.0 / 6f64.sqrt()) / 10.0;
        assert!((a.root - want).abs() < 1e-12);
        assert!((b.root - want).abs() < 1e-12);
        assert!(a.iterations <= 50);
    }

    #[test]
    fn mbnw_nonpositive_branch() {
        // ‖v‖₁ ≤ t‖v‖₂
        let v = array![1.0_f64, 0.9, 0.8];
        let res = mbnw_root(v.view(), 1.73, &RootConfig::default()).unwrap();
        assert!(res.root <= 0.0);
        assert!(phi(v.view(), res.root, 1.73).abs() < 1e-12);
    }

    #[test]
    fn mbnw_and_qasb_agree_on_vector() {
        let v = array![3.0_f64, 2.0, 1.0];
        let cfg = RootConfig::default();
        let a = mbnw_root(v.view(), 1.2, &cfg).unwrap();
        let b = qasb_root(v.view(), 1.2, (0.0, 2.0), &cfg).unwrap();
        assert!((a.root - b.root).abs() < 1e-8);
        assert!(mbnw_root(array![2.0_f64, 2.0].view(), 1.2, &cfg).is_err());
    }
}

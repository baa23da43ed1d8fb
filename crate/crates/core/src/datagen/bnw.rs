//! Piece-level counterexamples for the unguarded bisection-Newton method.
//!
//! Two pieces of Ψ are described by `(a, b, c)` = (active count, sum, sum of
//! squares). Piece 2 is given together with the point `λ̃2`; a Newton step
//! on piece 2 lands at `λ̃1`. The search picks piece 1 so that its tangent
//! at `λ̃1` passes through `(λ̃2, 0)`, which makes Newton alternate between
//! the two points forever.

use ndarray::Array1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::proj::{BreakpointStats, PiecewiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BnwInstance {
    pub a1: usize,
    pub b1: f64,
    pub c1: f64,
    pub tilde_lambda1: f64,
    pub a2: usize,
    pub b2: f64,
    pub c2: f64,
    pub tilde_lambda2: f64,
    pub t: f64,
}

fn piece(a: usize, b: f64, c: f64) -> BreakpointStats<f64> {
    BreakpointStats::from_sums(a, b, c, 0.0)
}

impl BnwInstance {
    pub fn piece1(&self) -> BreakpointStats<f64> {
        piece(self.a1, self.b1, self.c1)
    }

    pub fn piece2(&self) -> BreakpointStats<f64> {
        piece(self.a2, self.b2, self.c2)
    }

    /// `Ψ1(λ̃1) − Ψ1'(λ̃1)(λ̃1 − λ̃2)`; zero for a true loop.
    pub fn loop_residual(&self) -> Result<f64> {
        let p = self.piece1();
        let l = self.tilde_lambda1;
        let psi = p.psi_fun(l, self.t)?;
        let d = crate::proj::psi_fun_deriv(&p, l)?;
        Ok(psi - d * (l - self.tilde_lambda2))
    }

    /// Two-piece profile with the split halfway between `λ̃1` and `λ̃2`.
    /// The search interval is `[0, max(2λ̃1, λ̃2)]`, so the first bisection
    /// point is `λ̃1` whenever `2λ̃1 ≥ λ̃2`.
    pub fn to_model(&self) -> Result<PiecewiseModel<f64>> {
        let split = 0.5 * (self.tilde_lambda1 + self.tilde_lambda2);
        let upper = (2.0 * self.tilde_lambda1).max(self.tilde_lambda2);
        PiecewiseModel::two_piece(
            (upper, self.a2, self.b2, self.c2),
            (split, self.a1, self.b1, self.c1),
            upper,
        )
    }
}

/// Real roots of `a x³ + b x² + c x + d`, ascending. Degenerate leading
/// coefficients fall through to the quadratic or linear case. Each root is
/// polished with a few Newton steps.
pub fn cubic_real_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == 0.0 {
        return vec![];
    }
    let mut roots = if a.abs() <= 1e-14 * scale {
        quadratic_real_roots(b, c, d)
    } else {
        // depressed cubic y³ + p y + q with x = y − b/(3a)
        let (b, c, d) = (b / a, c / a, d / a);
        let shift = b / 3.0;
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        let tiny = 1e-14 * (1.0 + (q / 2.0).powi(2) + (p / 3.0).abs().powi(3));
        if disc > tiny {
            let sq = disc.sqrt();
            vec![(-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt() - shift]
        } else if p.abs() <= 1e-300 {
            vec![-shift]
        } else if disc >= -tiny && p < 0.0 {
            // double root
            let y = 3.0 * q / p;
            vec![y - shift, -y / 2.0 - shift, -y / 2.0 - shift]
        } else {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
                .collect()
        }
    };
    let f = |x: f64| ((a * x + b) * x + c) * x + d;
    let df = |x: f64| (3.0 * a * x + 2.0 * b) * x + c;
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let g = df(*r);
            if g == 0.0 {
                break;
            }
            let next = *r - f(*r) / g;
            if !next.is_finite() || f(next).abs() >= f(*r).abs() {
                break;
            }
            *r = next;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn quadratic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0, 0.0];
    }
    vec![q / a, c / q]
}

const LOOP_TOL: f64 = 1e-8;

/// Nearest multiple of 1/64 when `x` is within rounding noise of one.
/// Iterating Newton on the two pieces is only a stable cycle in exact
/// arithmetic, so exactly representable data keeps the loop intact.
fn snap(x: f64) -> f64 {
    let s = (x * 64.0).round() / 64.0;
    if (x - s).abs() <= 1e-9 * x.abs().max(1.0) {
        s
    } else {
        x
    }
}

/// Scan slopes `k` and counts `a1` for a piece 1 whose tangent at `λ̃1`
/// passes through `(λ̃2, 0)` with slope `k`.
///
/// `λ̃1` is the Newton step from `λ̃2` on piece 2. For each `(k, a1)` the
/// cubic in `b1` is solved; its real roots above `b2` are tried in
/// ascending order, `c1` follows from the tangent condition, and the first
/// candidate with `b1² − a1 c1 ≤ 0` and a nondegenerate piece at `λ̃1` is
/// returned. Counts `a1 ≤ a2` are skipped.
pub fn gen_bnw_counterexample(
    a2: usize,
    b2: f64,
    c2: f64,
    tilde_lambda2: f64,
    t: f64,
    slope_range: &[f64],
    a1_range: &[usize],
) -> Result<BnwInstance> {
    if slope_range.is_empty() || a1_range.is_empty() {
        return Err(Error::InvalidConfig(
            "slope and a1 ranges must be nonempty".into(),
        ));
    }
    if b2 * b2 - a2 as f64 * c2 > 1e-12 * b2 * b2 {
        return Err(Error::InvalidConfig(
            "piece 2 must satisfy b2² − a2·c2 ≤ 0".into(),
        ));
    }
    if !(t > 0.0) || !tilde_lambda2.is_finite() {
        return Err(Error::InvalidConfig(
            "t must be positive and λ̃2 finite".into(),
        ));
    }
    let p2 = piece(a2, b2, c2);
    let psi2 = p2.psi_fun(tilde_lambda2, t)?;
    let d2 = crate::proj::psi_fun_deriv(&p2, tilde_lambda2)?;
    let l1 = snap(tilde_lambda2 - psi2 / d2);
    if !l1.is_finite() {
        return Err(Error::InvalidConfig("piece 2 is flat at λ̃2".into()));
    }

    for &k in slope_range {
        let d0 = k * (l1 - tilde_lambda2) + t;
        if !(d0.abs() > 0.0) || !k.is_finite() {
            continue;
        }
        let (d2_, d3) = (d0 * d0, d0 * d0 * d0);
        for &a1 in a1_range {
            if a1 <= a2 {
                continue;
            }
            let a = a1 as f64;
            let ca = k / d3;
            let cb = -3.0 * a * l1 * k / d3 + a / d2_ - 1.0;
            let cc = 3.0 * a * a * l1 * l1 * k / d3 - 2.0 * a * a * l1 / d2_ + 2.0 * a * l1;
            let cd =
                -a * a * a * l1 * l1 * l1 * k / d3 + a * a * a * l1 * l1 / d2_ - a * a * l1 * l1;
            for b1 in cubic_real_roots(ca, cb, cc, cd)
                .into_iter()
                .filter(|&b| b > b2)
            {
                let l2 = (b1 - a * l1) / d0;
                if !(l2 > 1e-9 * b1.abs().max(1.0)) {
                    continue;
                }
                let c1 = l2 * l2 + 2.0 * b1 * l1 - a * l1 * l1;
                if b1 * b1 - a * c1 > 1e-12 * b1 * b1 {
                    continue;
                }
                let candidates = [(snap(b1), snap(c1)), (b1, c1)];
                for (b1, c1) in candidates {
                    if b1 * b1 - a * c1 > 1e-12 * b1 * b1 {
                        continue;
                    }
                    let inst = BnwInstance {
                        a1,
                        b1,
                        c1,
                        tilde_lambda1: l1,
                        a2,
                        b2,
                        c2,
                        tilde_lambda2,
                        t,
                    };
                    match inst.loop_residual() {
                        Ok(r) if r.abs() <= LOOP_TOL => return Ok(inst),
                        _ => continue,
                    }
                }
            }
        }
    }
    Err(Error::ExhaustedSearch)
}

/// `n` values with the given sum and sum of squares, as tightly packed as
/// possible: one value above the mean, the rest equal below it.
fn realize(n: usize, sum: f64, sum_sq: f64) -> Option<Vec<f64>> {
    let nf = n as f64;
    let mean = sum / nf;
    let m2 = sum_sq - sum * mean;
    if m2 < -1e-10 * sum_sq.abs().max(1.0) {
        return None;
    }
    let m2 = m2.max(0.0);
    if n == 1 {
        return (m2 <= 1e-10 * sum_sq.abs().max(1.0)).then(|| vec![mean]);
    }
    let a = (m2 * (nf - 1.0) / nf).sqrt();
    let mut v = vec![mean - a / (nf - 1.0); n];
    v[0] = mean + a;
    Some(v)
}

/// A nonnegative vector whose Ψ agrees with piece 2 at `λ̃2` and with
/// piece 1 at `λ̃1`, when one exists.
///
/// The top `a2` entries must lie above `λ̃2` and the remaining `a1 − a2`
/// entries in `(λ̃1, λ̃2]`. Returned entries are sorted in decreasing order.
pub fn lift_to_vector(inst: &BnwInstance) -> Result<Array1<f64>> {
    if inst.a1 <= inst.a2 {
        return Err(Error::NonLiftable(
            "piece 1 must have more active entries than piece 2",
        ));
    }
    let top = realize(inst.a2, inst.b2, inst.c2)
        .ok_or(Error::NonLiftable("piece 2 sums admit no real values"))?;
    let rest = realize(inst.a1 - inst.a2, inst.b1 - inst.b2, inst.c1 - inst.c2).ok_or(
        Error::NonLiftable("the entries added by piece 1 would need negative variance"),
    )?;
    let top_min = top.iter().copied().fold(f64::INFINITY, f64::min);
    let rest_max = rest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rest_min = rest.iter().copied().fold(f64::INFINITY, f64::min);
    if !(top_min > inst.tilde_lambda2) {
        return Err(Error::NonLiftable("piece 2 entries do not all exceed λ̃2"));
    }
    if !(rest_max <= inst.tilde_lambda2 && rest_min > inst.tilde_lambda1) {
        return Err(Error::NonLiftable("piece 1 entries do not fit in (λ̃1, λ̃2]"));
    }
    let mut v: Vec<f64> = top.into_iter().chain(rest).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(Array1::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proj::{bnw_unguarded, mbnw_profile, Profile, RootConfig};

    fn paper_like() -> BnwInstance {
        gen_bnw_counterexample(2, 9.0, 41.0, 4.0, 2.0, &[-1.0], &[10]).unwrap()
    }

    #[test]
    fn cubic_roots_known() {
        let r = cubic_real_roots(1.0, -6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (x, e) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
        let r = cubic_real_roots(1.0, 0.0, 1.0, 0.0);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-15);
        let r = cubic_real_roots(0.0, 1.0, -3.0, 2.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reproduces_example_instance() {
        let i = paper_like();
        assert_eq!(i.a1, 10);
        assert!((i.tilde_lambda1 - 3.0).abs() < 1e-12);
        assert_eq!((i.b1, i.c1), (33.0, 109.0));
        let p = i.piece1();
        assert!((p.psi_fun(3.0, 2.0).unwrap() - 1.0).abs() < 1e-9);
        assert!((crate::proj::psi_fun_deriv(&p, 3.0).unwrap() + 1.0).abs() < 1e-9);
        assert!(i.loop_residual().unwrap().abs() < 1e-8);
    }

    #[test]
    fn scanned_instances_are_valid() {
        let slopes: Vec<f64> = (1..=40).map(|j| -0.25 * j as f64).collect();
        let a1s: Vec<usize> = (3..=40).collect();
        let i = gen_bnw_counterexample(2, 9.0, 41.0, 4.0, 2.0, &slopes, &a1s).unwrap();
        assert!(i.b1 * i.b1 - i.a1 as f64 * i.c1 <= 1e-12 * i.b1 * i.b1);
        assert!(i.b2 * i.b2 - i.a2 as f64 * i.c2 <= 0.0);
        assert!(i.loop_residual().unwrap().abs() < 1e-8);
    }

    #[test]
    fn generated_instance_cycles_and_mbnw_terminates() {
        let i = paper_like();
        let m = i.to_model().unwrap();
        let rep = bnw_unguarded(&m, 2.0, 40).unwrap();
        assert!(!rep.finished, "{:?}", rep.history);
        assert!(rep.repeats >= 20);
        let (lo, hi) = rep.cycle_pair.unwrap();
        assert!((lo - 3.0).abs() < 1e-9 && (hi - 4.0).abs() < 1e-9);
        let r = mbnw_profile(&m, 2.0, &RootConfig::default()).unwrap();
        assert!(m.phi(r.root, 2.0).abs() < 1e-9);
    }

    #[test]
    fn example_is_not_liftable() {
        assert!(matches!(
            lift_to_vector(&paper_like()),
            Err(Error::NonLiftable(_))
        ));
    }

    #[test]
    fn lift_realizes_pieces() {
        let inst = BnwInstance {
            a1: 3,
            b1: 5.0 + 4.0 + 2.5,
            c1: 25.0 + 16.0 + 6.25,
            tilde_lambda1: 2.0,
            a2: 2,
            b2: 9.0,
            c2: 41.0,
            tilde_lambda2: 3.0,
            t: 1.2,
        };
        let v = lift_to_vector(&inst).unwrap();
        let s2 = BreakpointStats::of_vector(v.view(), 3.0 + 1e-9);
        assert_eq!(s2.count, 2);
        assert!((s2.sum - 9.0).abs() < 1e-12 && (s2.sum_sq - 41.0).abs() < 1e-9);
        let s1 = BreakpointStats::of_vector(v.view(), 2.0 + 1e-9);
        assert_eq!(s1.count, 3);
        assert!((s1.sum_sq - inst.c1).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(gen_bnw_counterexample(2, 9.0, 41.0, 4.0, 2.0, &[], &[10]).is_err());
        assert!(gen_bnw_counterexample(2, 10.0, 41.0, 4.0, 2.0, &[-1.0], &[10]).is_err());
        assert!(matches!(
            gen_bnw_counterexample(2, 9.0, 41.0, 4.0, 2.0, &[-1.0], &[2]),
            Err(Error::ExhaustedSearch)
        ));
    }
}

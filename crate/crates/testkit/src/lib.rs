//! Brute-force oracles for the scotlass test suites.
//!
//! Nothing here shares code with the library under test: vectors are plain
//! `Vec<f64>`, dense algebra goes through nalgebra, and projections are
//! found by enumerating every breakpoint piece and by random sampling.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use nalgebra;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Set {
    /// ‖x‖₁ ≤ t, ‖x‖₂ ≤ 1
    B1B2,
    /// ‖x‖₁ = t, ‖x‖₂ = 1
    S1S2,
    /// ‖x‖₁ ≤ t, ‖x‖₂ = 1
    B1S2,
}

pub const ALL_SETS: [Set; 3] = [Set::B1B2, Set::S1S2, Set::B1S2];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(rng))
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn is_feasible(x: &[f64], set: Set, t: f64, tol: f64) -> bool {
    let (l1, l2) = (norm1(x), norm2(x));
    match set {
        Set::B1B2 => l1 <= t + tol && l2 <= 1.0 + tol,
        Set::S1S2 => (l1 - t).abs() <= tol && (l2 - 1.0).abs() <= tol,
        Set::B1S2 => l1 <= t + tol && (l2 - 1.0).abs() <= tol,
    }
}

/// `(Σ (u−λ)⁺, Σ ((u−λ)⁺)²)` by direct summation.
pub fn clipped(u: &[f64], lambda: f64) -> (f64, f64) {
    u.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = (x - lambda).max(0.0);
        (a + d, b + d * d)
    })
}

pub fn phi(u: &[f64], lambda: f64, t: f64) -> f64 {
    let (l1, l2sq) = clipped(u, lambda);
    l1 * l1 - t * t * l2sq
}

pub fn psi(u: &[f64], lambda: f64, t: f64) -> f64 {
    clipped(u, lambda).0 - t
}

/// Ψ(λ) = l1/l2 − t.
pub fn psi_ratio(u: &[f64], lambda: f64, t: f64) -> f64 {
    let (l1, l2sq) = clipped(u, lambda);
    l1 / l2sq.sqrt() - t
}

/// Plain bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let flo = f(lo);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of `a x² + b x + c` (linear when `a = 0`).
fn quad_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() < 1e-300 {
        return if b != 0.0 { vec![-c / b] } else { vec![] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc > -1e-12 * b * b {
            return vec![-b / (2.0 * a)];
        }
        return vec![];
    }
    let s = disc.sqrt();
    vec![(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
}

fn with_signs(v: &[f64], x: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(x)
        .map(|(&vi, &xi)| if vi < 0.0 { -xi } else { xi })
        .collect()
}

/// Newton steps on `Σ(u−λ) − t·√Σ(u−λ)²` over a fixed support, summed
/// directly so the quadratic formula's cancellation does not leak into the
/// candidate's ℓ1 norm.
fn polish_ratio_root(sup: &[f64], t: f64, mut lam: f64) -> f64 {
    for _ in 0..4 {
        let l1: f64 = sup.iter().map(|&x| x - lam).sum();
        let l2: f64 = sup
            .iter()
            .map(|&x| (x - lam) * (x - lam))
            .sum::<f64>()
            .sqrt();
        if l2 == 0.0 {
            break;
        }
        let h = l1 - t * l2;
        let dh = -(sup.len() as f64) + t * l1 / l2;
        if dh == 0.0 || !h.is_finite() {
            break;
        }
        let next = lam - h / dh;
        if !next.is_finite() {
            break;
        }
        lam = next;
    }
    lam
}

/// Feasible candidates for the projection of `v`: for every support made
/// of the `k` largest `|v_i|` and every threshold `λ` that solves the
/// active constraints on that support (both roots of
/// `(Σ(u−λ))² = t² Σ(u−λ)²`, the ℓ1 threshold `Σ(u−λ) = t`), the
/// resulting (normalized) thresholded vector, plus `v` and `v/‖v‖₂`.
/// Candidates that clip a support entry or leave the set are dropped.
pub fn piece_candidates(v: &[f64], t: f64, set: Set) -> Vec<Vec<f64>> {
    let n = v.len();
    let u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| u[b].total_cmp(&u[a]));
    let mut out: Vec<Vec<f64>> = Vec::new();
    let tol = 1e-12 * t.max(1.0);
    let mut push = |x: Vec<f64>| {
        if x.iter().all(|c| c.is_finite()) && is_feasible(&x, set, t, tol) {
            out.push(x);
        }
    };
    push(v.to_vec());
    let nv = norm2(v);
    if nv > 0.0 {
        push(v.iter().map(|x| x / nv).collect());
    }
    for k in 1..=n {
        let idx = &order[..k];
        let s: f64 = idx.iter().map(|&i| u[i]).sum();
        let w: f64 = idx.iter().map(|&i| u[i] * u[i]).sum();
        let kf = k as f64;
        let sup: Vec<f64> = idx.iter().map(|&i| u[i]).collect();
        let mut lambdas: Vec<f64> = quad_roots(
            kf * (kf - t * t),
            -2.0 * (kf - t * t) * s,
            s * s - t * t * w,
        )
        .into_iter()
        .map(|l| polish_ratio_root(&sup, t, l))
        .collect();
        lambdas.push((s - t) / kf);
        for lam in lambdas {
            let mut y = vec![0.0; n];
            let mut ok = true;
            for &i in idx {
                let d = u[i] - lam;
                if d < -1e-12 {
                    ok = false;
                }
                y[i] = d.max(0.0);
            }
            if !ok {
                continue;
            }
            let x = with_signs(v, &y);
            push(x.clone());
            let ny = norm2(&y);
            if ny > 0.0 {
                push(x.iter().map(|c| c / ny).collect());
            }
        }
    }
    out
}

/// Smallest squared distance from `v` over [`piece_candidates`].
pub fn best_piece(v: &[f64], t: f64, set: Set) -> Option<(f64, Vec<f64>)> {
    piece_candidates(v, t, set)
        .into_iter()
        .map(|x| (dist2(v, &x), x))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

/// Random points of a set, with scratch buffers reused across draws.
///
/// About half the draws are biased toward the direction of the hint (if
/// given) so the sample covers the neighbourhood of the projection as well
/// as the whole set. Points are accepted only when they satisfy the
/// constraints to about 1e-13.
pub struct Sampler {
    set: Set,
    t: f64,
    z: Vec<f64>,
    w: Vec<f64>,
    sgn: Vec<f64>,
    idx: Vec<usize>,
    x: Vec<f64>,
}

impl Sampler {
    pub fn new(n: usize, set: Set, t: f64) -> Self {
        Sampler {
            set,
            t,
            z: vec![0.0; n],
            w: vec![0.0; n],
            sgn: vec![0.0; n],
            idx: (0..n).collect(),
            x: vec![0.0; n],
        }
    }

    pub fn sample<R: Rng>(&mut self, rng: &mut R, hint: Option<&[f64]>) -> &[f64] {
        let (n, t, set) = (self.z.len(), self.t, self.set);
        let tol = 1e-13 * t.max(1.0);
        // Ω2 needs at least t² nonzeros
        let min_k = match set {
            Set::S1S2 => ((t * t - 1e-12).ceil() as usize).clamp(1, n),
            _ => 1,
        };
        loop {
            for zi in self.z.iter_mut() {
                *zi = StandardNormal.sample(rng);
            }
            if let Some(h) = hint {
                if rng.random_bool(0.5) {
                    let scale = 10f64.powf(rng.random_range(-3.0..0.5));
                    let nh = norm2(h).max(1e-300);
                    for (zi, hi) in self.z.iter_mut().zip(h) {
                        *zi = hi / nh + scale * *zi;
                    }
                }
            }
            // random sparsity pattern
            if rng.random_bool(0.5) {
                let k = rng.random_range(min_k..=n);
                for i in 0..n {
                    let j = rng.random_range(i..n);
                    self.idx.swap(i, j);
                }
                for &i in &self.idx[k..] {
                    self.z[i] = 0.0;
                }
            }
            let nz = norm2(&self.z);
            if nz == 0.0 {
                continue;
            }
            let ok = match set {
                Set::B1B2 => {
                    let c = (1.0 / nz).min(t / norm1(&self.z));
                    let r: f64 = if rng.random_bool(0.5) {
                        1.0
                    } else {
                        rng.random()
                    };
                    for (x, z) in self.x.iter_mut().zip(&self.z) {
                        *x = z * c * r;
                    }
                    true
                }
                Set::B1S2 => {
                    if norm1(&self.z) / nz <= t && rng.random_bool(0.5) {
                        for (x, z) in self.x.iter_mut().zip(&self.z) {
                            *x = z / nz;
                        }
                        true
                    } else {
                        // Ω3 is the union of the Ω2 shells with radius in [1, t]
                        let k = self.z.iter().filter(|&&v| v != 0.0).count() as f64;
                        let radius = 1.0 + rng.random::<f64>() * (t.min(k.sqrt()) - 1.0).max(0.0);
                        self.shell_point(rng, radius)
                    }
                }
                Set::S1S2 => self.shell_point(rng, t),
            };
            if ok && is_feasible(&self.x, set, t, tol) {
                return &self.x;
            }
        }
    }

    /// `x = (t/k)·s + r·w` on the support of `z` with signs `s` and a random
    /// `w ⟂ s`, so `‖x‖₁ = t` and `‖x‖₂ = 1`. Coordinates whose sign would
    /// flip leave the support and the point is rebuilt; false once fewer
    /// than `t²` coordinates remain.
    fn shell_point<R: Rng>(&mut self, rng: &mut R, t: f64) -> bool {
        let n = self.z.len();
        for i in 0..n {
            self.sgn[i] = if self.z[i] > 0.0 {
                1.0
            } else if self.z[i] < 0.0 {
                -1.0
            } else {
                0.0
            };
            self.w[i] = StandardNormal.sample(rng);
        }
        loop {
            let k = self.sgn.iter().filter(|&&s| s != 0.0).count() as f64;
            if k < t * t * (1.0 - 1e-12) {
                return false;
            }
            for i in 0..n {
                if self.sgn[i] == 0.0 {
                    self.w[i] = 0.0;
                }
            }
            let ws: f64 = self
                .w
                .iter()
                .zip(&self.sgn)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / k;
            for i in 0..n {
                self.w[i] -= ws * self.sgn[i];
            }
            let nw = norm2(&self.w);
            let r = (1.0 - t * t / k).max(0.0).sqrt();
            let mut flipped = false;
            for i in 0..n {
                self.x[i] = t / k * self.sgn[i] + if nw > 0.0 { r * self.w[i] / nw } else { 0.0 };
                if self.x[i] * self.sgn[i] < 0.0 {
                    self.sgn[i] = 0.0;
                    flipped = true;
                }
            }
            if !flipped {
                return true;
            }
        }
    }
}

/// One random point of the set; see [`Sampler`].
pub fn sample_feasible<R: Rng>(
    rng: &mut R,
    n: usize,
    set: Set,
    t: f64,
    hint: Option<&[f64]>,
) -> Vec<f64> {
    Sampler::new(n, set, t).sample(rng, hint).to_vec()
}

/// Best squared distance from `v` over `count` random feasible points.
pub fn best_random<R: Rng>(rng: &mut R, v: &[f64], t: f64, set: Set, count: usize) -> f64 {
    let mut s = Sampler::new(v.len(), set, t);
    (0..count)
        .map(|_| dist2(v, s.sample(rng, Some(v))))
        .fold(f64::INFINITY, f64::min)
}

/// Central-difference gradient.
pub fn finite_diff_grad<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let xi = y[i];
            y[i] = xi + h;
            let fp = f(&y);
            y[i] = xi - h;
            let fm = f(&y);
            y[i] = xi;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Eigenvalues in decreasing order with matching eigenvector columns.
pub fn sym_eigen_desc(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(a.clone());
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Singular values in decreasing order and the matching right singular
/// vectors as columns.
pub fn svd_desc(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let sv = svd.singular_values;
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let vals = idx.iter().map(|&i| sv[i]).collect();
    let v = DMatrix::from_fn(a.ncols(), idx.len(), |r, c| vt[(idx[c], r)]);
    (vals, v)
}

/// `‖A − A V Vᵀ‖_F / ‖A‖_F` for the top `r` right singular vectors, from
/// the singular values alone.
pub fn svd_tail_rre(a: &DMatrix<f64>, r: usize) -> f64 {
    let (s, _) = svd_desc(a);
    let total: f64 = s.iter().map(|x| x * x).sum();
    let tail: f64 = s.iter().skip(r).map(|x| x * x).sum();
    (tail / total).sqrt()
}

/// Row-major `Vec<Vec<f64>>` from a nalgebra matrix.
pub fn rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| a.row(i).iter().copied().collect())
        .collect()
}

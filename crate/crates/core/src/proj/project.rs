//! Euclidean projections onto Ω1, Ω2, Ω3 and the farthest-point map.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use super::aux::{closed_form_root, psi_root};
use super::profile::{Profile, SortedProfile};
use super::roots::{mbnw_profile, qasb_profile, RootConfig, RootResult};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// ℓ1 radius `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Radius<T>(T);

impl<T: Scalar> Radius<T> {
    pub fn new(t: T) -> Result<Self> {
        if !(t.is_finite() && t > T::zero()) {
            return Err(Error::InvalidRadius {
                t: t.as_f64(),
                n: 0,
                reason: "must be finite and positive",
            });
        }
        Ok(Self(t))
    }

    pub fn get(self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetKind {
    /// `‖x‖₁ ≤ t, ‖x‖₂ ≤ 1`
    Ball1Ball2,
    /// `‖x‖₁ = t, ‖x‖₂ = 1`
    Sphere1Sphere2,
    /// `‖x‖₁ ≤ t, ‖x‖₂ = 1`
    Ball1Sphere2,
}

impl SetKind {
    pub fn tag(self) -> &'static str {
        match self {
            SetKind::Ball1Ball2 => "p1",
            SetKind::Sphere1Sphere2 => "p2",
            SetKind::Ball1Sphere2 => "p3",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" | "ball1ball2" => Some(SetKind::Ball1Ball2),
            "p2" | "sphere1sphere2" => Some(SetKind::Sphere1Sphere2),
            "p3" | "ball1sphere2" => Some(SetKind::Ball1Sphere2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet<T> {
    pub kind: SetKind,
    pub t: Radius<T>,
}

impl<T: Scalar> ConstraintSet<T> {
    pub fn new(kind: SetKind, t: T) -> Result<Self> {
        Ok(Self {
            kind,
            t: Radius::new(t)?,
        })
    }

    /// Checks that the set is nonempty in dimension `n`.
    ///
    /// Ω1 is fine for any `t > 0`. Ω3 needs `t ≥ 1` and Ω2 needs
    /// `1 ≤ t ≤ √n`; the nominal range is `1 < t < √n` and the edges
    /// degenerate to trivial sets that are still handled.
    pub fn check_dimension(&self, n: usize) -> Result<()> {
        let t = self.t.get();
        let bad = |reason| {
            Err(Error::InvalidRadius {
                t: t.as_f64(),
                n,
                reason,
            })
        };
        let one_minus = T::one() - T::tol(1e-12, 8.0);
        match self.kind {
            SetKind::Ball1Ball2 => Ok(()),
            SetKind::Ball1Sphere2 if t < one_minus => bad("the set is empty for t < 1"),
            SetKind::Sphere1Sphere2 if t < one_minus => bad("the set is empty for t < 1"),
            SetKind::Sphere1Sphere2 if t * t > T::count(n) * (T::one() + T::tol(1e-12, 8.0)) => {
                bad("the set is empty for t > √n")
            }
            _ => Ok(()),
        }
    }

    /// Whether `x` lies in the set up to `tol`.
    pub fn contains(&self, x: ArrayView1<'_, T>, tol: T) -> bool {
        let t = self.t.get();
        let l1: T = x.iter().map(|v| v.abs()).sum();
        let l2 = x.iter().map(|&v| v * v).sum::<T>().sqrt();
        match self.kind {
            SetKind::Ball1Ball2 => l1 <= t + tol && l2 <= T::one() + tol,
            SetKind::Sphere1Sphere2 => (l1 - t).abs() <= tol && (l2 - T::one()).abs() <= tol,
            SetKind::Ball1Sphere2 => l1 <= t + tol && (l2 - T::one()).abs() <= tol,
        }
    }
}

/// Root finder used for the φ root inside the projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RootMethod {
    #[default]
    Qasb,
    Mbnw,
}

/// Which branch of the case analysis produced a projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProjectionCase {
    /// Input already feasible.
    Identity,
    /// `v / ‖v‖₂`.
    Normalized,
    /// Soft threshold at the ℓ1 root.
    L1Threshold,
    /// Normalised soft threshold at the φ root.
    PhiRoot,
    /// More maxima than `t²`: the tie representative.
    Tie,
    /// Exactly `t²` maxima: uniform on the maxima.
    Uniform,
    /// Ω2 with `t = √n`: every coordinate `±1/√n`.
    Corner,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionOutcome<T> {
    pub x: Array1<T>,
    pub case: ProjectionCase,
    pub root: Option<RootResult<T>>,
}

/// Projection operator for one constraint set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projector<T> {
    pub set: ConstraintSet<T>,
    pub method: RootMethod,
    pub root_cfg: RootConfig<T>,
}

enum Order {
    Less,
    Equal,
    Greater,
}

/// Compares the integer `count` against `t²` with a relative tolerance, so
/// that `t = √k` computed in floating point is recognised as `t² = k`.
fn compare_count<T: Scalar>(count: usize, t: T) -> Order {
    let c = T::count(count);
    let t_sq = t * t;
    if (c - t_sq).abs() <= T::tol(1e-12, 8.0) * c.max(t_sq) {
        Order::Equal
    } else if c < t_sq {
        Order::Less
    } else {
        Order::Greater
    }
}

fn validate_vector<T: Scalar>(v: ArrayView1<'_, T>) -> Result<()> {
    if v.len() < 2 {
        return Err(Error::TooShort { len: v.len() });
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// Puts the signs of `v` back on a nonnegative solution; zero inputs get `+`.
fn restore_signs<T: Scalar>(v: ArrayView1<'_, T>, mut x: Array1<T>) -> Array1<T> {
    for (xi, &vi) in x.iter_mut().zip(v.iter()) {
        if vi < T::zero() {
            *xi = -*xi;
        }
    }
    x
}

fn normalized_threshold<T: Scalar>(u: ArrayView1<'_, T>, lambda: T) -> Array1<T> {
    let y = u.mapv(|x| (x - lambda).max(T::zero()));
    let n = crate::linalg::norm2(y.view());
    y.mapv(|x| x / n)
}

/// Remark-style representative of the tie case: on the `I1` maximal
/// coordinates take the segment point between the uniform vector `t/I1`
/// and `t·e_first` that lies on the unit sphere.
pub fn tie_solution<T: Scalar>(
    active_count: usize,
    active_indices: &[usize],
    t: T,
    n: usize,
) -> Result<Array1<T>> {
    if active_indices.len() != active_count {
        return Err(Error::DimensionMismatch {
            expected: active_count,
            found: active_indices.len(),
        });
    }
    if !matches!(compare_count(active_count, t), Order::Greater) {
        return Err(Error::TiePrecondition {
            count: active_count,
            t_sq: (t * t).as_f64(),
        });
    }
    if let Some(&bad) = active_indices.iter().find(|&&i| i >= n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad + 1,
        });
    }
    let i1 = T::count(active_count);
    // t within rounding of 1 can push s just past 1
    let s = (((i1 - t * t) / (i1 - T::one())).sqrt() / t).min(T::one());
    let base = (T::one() - s) * t / i1;
    let mut x = Array1::<T>::zeros(n);
    let first = *active_indices.iter().min().expect("I1 > t² > 0");
    for &i in active_indices {
        x[i] = base;
    }
    x[first] = base + s * t;
    Ok(x)
}

impl<T: Scalar> Projector<T> {
    pub fn new(set: ConstraintSet<T>) -> Self {
        Self {
            set,
            method: RootMethod::default(),
            root_cfg: RootConfig::default(),
        }
    }

    pub fn with_method(mut self, method: RootMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_root_config(mut self, cfg: RootConfig<T>) -> Self {
        self.root_cfg = cfg;
        self
    }

    pub fn project(&self, v: ArrayView1<'_, T>) -> Result<Array1<T>> {
        Ok(self.project_detailed(v)?.x)
    }

    /// Farthest point of the set from `v`: `−P_Ω2(v)` on Ω2 and `−P_Ω3(v)`
    /// on both Ω1 and Ω3.
    pub fn q_project(&self, v: ArrayView1<'_, T>) -> Result<Array1<T>> {
        Ok(-self.farthest().project(v)?)
    }

    /// The projector whose negation gives farthest points: onto Ω2 for Ω2
    /// and onto Ω3 for Ω1 and Ω3 (a convex function over Ω1 peaks on the
    /// unit sphere).
    pub fn farthest(&self) -> Projector<T> {
        let kind = match self.set.kind {
            SetKind::Sphere1Sphere2 => SetKind::Sphere1Sphere2,
            _ => SetKind::Ball1Sphere2,
        };
        Projector {
            set: ConstraintSet {
                kind,
                t: self.set.t,
            },
            ..*self
        }
    }

    pub fn project_detailed(&self, v: ArrayView1<'_, T>) -> Result<ProjectionOutcome<T>> {
        validate_vector(v)?;
        self.set.check_dimension(v.len())?;
        let u = v.mapv(|x| x.abs());
        let mut out = match self.set.kind {
            SetKind::Ball1Ball2 => self.p1(u.view())?,
            SetKind::Sphere1Sphere2 => self.p2(u.view())?,
            SetKind::Ball1Sphere2 => self.p3(u.view())?,
        };
        out.x = restore_signs(v, out.x);
        Ok(out)
    }

    fn find_root(&self, p: &SortedProfile<'_, T>, bracket: (T, T)) -> Result<RootResult<T>> {
        let t = self.set.t.get();
        match self.method {
            RootMethod::Qasb => qasb_profile(p, t, bracket, &self.root_cfg),
            RootMethod::Mbnw => mbnw_profile(p, t, &self.root_cfg),
        }
    }

    fn phi_root_outcome(
        &self,
        u: ArrayView1<'_, T>,
        bracket: (T, T),
    ) -> Result<ProjectionOutcome<T>> {
        let p = SortedProfile::new(u);
        let root = self.find_root(&p, bracket)?;
        Ok(ProjectionOutcome {
            x: normalized_threshold(u, root.root),
            case: ProjectionCase::PhiRoot,
            root: Some(root),
        })
    }

    fn p1(&self, u: ArrayView1<'_, T>) -> Result<ProjectionOutcome<T>> {
        let t = self.set.t.get();
        let l1: T = u.iter().copied().sum();
        let l2 = crate::linalg::norm2(u);
        if l2 <= T::one() && l1 <= t {
            return Ok(ProjectionOutcome {
                x: u.to_owned(),
                case: ProjectionCase::Identity,
                root: None,
            });
        }
        if l2 > T::one() && l1 <= t * l2 {
            return Ok(ProjectionOutcome {
                x: u.mapv(|x| x / l2),
                case: ProjectionCase::Normalized,
                root: None,
            });
        }
        let lam_hat = psi_root(u, t)?;
        let y = u.mapv(|x| (x - lam_hat).max(T::zero()));
        let ny = crate::linalg::norm2(y.view());
        // ‖y‖₂ = 1 up to rounding puts the φ root at λ̂ itself
        if ny <= T::one() + T::tol(1e-14, 16.0) {
            return Ok(ProjectionOutcome {
                x: y.mapv(|x| x / ny.max(T::one())),
                case: ProjectionCase::L1Threshold,
                root: None,
            });
        }
        self.phi_root_outcome(u, (T::zero(), lam_hat))
    }

    fn p2(&self, u: ArrayView1<'_, T>) -> Result<ProjectionOutcome<T>> {
        let t = self.set.t.get();
        let n = u.len();
        let p = SortedProfile::new(u);
        if p.top() == T::zero() {
            return Err(Error::ZeroVector);
        }
        if matches!(compare_count(n, t), Order::Equal) {
            let c = T::one() / T::count(n).sqrt();
            return Ok(ProjectionOutcome {
                x: Array1::from_elem(n, c),
                case: ProjectionCase::Corner,
                root: None,
            });
        }
        if let Some(out) = self.top_cases(u, &p)? {
            return Ok(out);
        }
        // I1 < t²
        if p.phi(T::zero(), t) > T::zero() {
            return self.phi_root_outcome(u, (T::zero(), p.search_upper()));
        }
        let root = closed_form_root(&p.all_stats(), t)?;
        let root = RootResult {
            root,
            residual: p.phi(root, t).abs(),
            iterations: 0,
            bracket: (root, T::zero()),
        };
        Ok(ProjectionOutcome {
            x: normalized_threshold(u, root.root),
            case: ProjectionCase::PhiRoot,
            root: Some(root),
        })
    }

    fn p3(&self, u: ArrayView1<'_, T>) -> Result<ProjectionOutcome<T>> {
        let t = self.set.t.get();
        let p = SortedProfile::new(u);
        if p.top() == T::zero() {
            return Err(Error::ZeroVector);
        }
        if let Some(out) = self.top_cases(u, &p)? {
            return Ok(out);
        }
        if p.phi(T::zero(), t) > T::zero() {
            return self.phi_root_outcome(u, (T::zero(), p.search_upper()));
        }
        let l2 = crate::linalg::norm2(u);
        Ok(ProjectionOutcome {
            x: u.mapv(|x| x / l2),
            case: ProjectionCase::Normalized,
            root: None,
        })
    }

    /// Shared handling of `I1 ≥ t²` for Ω2 and Ω3.
    fn top_cases(
        &self,
        u: ArrayView1<'_, T>,
        p: &SortedProfile<'_, T>,
    ) -> Result<Option<ProjectionOutcome<T>>> {
        let t = self.set.t.get();
        let i1 = p.top_count();
        let top = p.top();
        let active = || (0..u.len()).filter(|&i| u[i] == top).collect::<Vec<_>>();
        match compare_count(i1, t) {
            Order::Greater => {
                let x = tie_solution(i1, &active(), t, u.len())?;
                Ok(Some(ProjectionOutcome {
                    x,
                    case: ProjectionCase::Tie,
                    root: None,
                }))
            }
            Order::Equal => {
                let mut x = Array1::<T>::zeros(u.len());
                let c = T::one() / T::count(i1).sqrt();
                for i in active() {
                    x[i] = c;
                }
                Ok(Some(ProjectionOutcome {
                    x,
                    case: ProjectionCase::Uniform,
                    root: None,
                }))
            }
            Order::Less => Ok(None),
        }
    }
}

fn project_with<T: Scalar>(kind: SetKind, v: ArrayView1<'_, T>, t: T) -> Result<Array1<T>> {
    Projector::new(ConstraintSet::new(kind, t)?).project(v)
}

/// Projection onto `{‖x‖₁ ≤ t, ‖x‖₂ ≤ 1}`.
pub fn project_p1<T: Scalar>(v: ArrayView1<'_, T>, t: T) -> Result<Array1<T>> {
    project_with(SetKind::Ball1Ball2, v, t)
}

/// Projection onto `{‖x‖₁ = t, ‖x‖₂ = 1}`.
pub fn project_p2<T: Scalar>(v: ArrayView1<'_, T>, t: T) -> Result<Array1<T>> {
    project_with(SetKind::Sphere1Sphere2, v, t)
}

/// Projection onto `{‖x‖₁ ≤ t, ‖x‖₂ = 1}`.
pub fn project_p3<T: Scalar>(v: ArrayView1<'_, T>, t: T) -> Result<Array1<T>> {
    project_with(SetKind::Ball1Sphere2, v, t)
}

/// Farthest point of `set` from `v`.
pub fn q_project<T: Scalar>(v: ArrayView1<'_, T>, set: ConstraintSet<T>) -> Result<Array1<T>> {
    Projector::new(set).q_project(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn norms(x: &Array1<f64>) -> (f64, f64) {
        (x.iter().map(|v| v.abs()).sum(), x.dot(x).sqrt())
    }

    #[test]
    fn tie_solution_example() {
        let x = tie_solution::<f64>(3, &[0, 1, 2], 1.5, 3).unwrap();
        let s = (2.0 / 3.0) * (0.75f64 / 2.0).sqrt();
        assert!((s - 0.40825).abs() < 1e-5);
        assert!((x[0] - 0.90825).abs() < 1e-5);
        assert!((x[1] - 0.29588).abs() < 1e-5);
        assert_eq!(x[1], x[2]);
        let (l1, l2) = norms(&x);
        assert!((l1 - 1.5).abs() < 1e-12 && (l2 - 1.0).abs() < 1e-12);

        let t = 2f64.sqrt() - 1e-9;
        let y = tie_solution(2, &[0, 1], t, 4).unwrap();
        let (l1, l2) = norms(&y);
        assert!((l1 - t).abs() < 1e-9 && (l2 - 1.0).abs() < 1e-9);

        assert!(matches!(
            tie_solution(2, &[0, 1], 2f64.sqrt(), 2),
            Err(Error::TiePrecondition { .. })
        ));
    }

    #[test]
    fn p1_cases() {
        let v = array![0.3_f64, -0.2];
        assert_eq!(project_p1(v.view(), 1.2).unwrap(), v);
        let w = array![3.0_f64, 0.0];
        assert_eq!(project_p1(w.view(), 1.2).unwrap(), array![1.0_f64, 0.0]);
        let z = project_p1(array![3.0_f64, 1.0, -0.5].view(), 1.2).unwrap();
        let (l1, l2) = norms(&z);
        assert!(l1 <= 1.2 + 1e-12 && l2 <= 1.0 + 1e-12);
        assert!(z[2] <= 0.0);
    }

    #[test]
    fn p2_cases() {
        let x = project_p2(array![2.0_f64, 2.0, 1.0, 0.0].view(), 2f64.sqrt()).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((x[0] - h).abs() < 1e-15 && (x[1] - h).abs() < 1e-15);
        assert_eq!((x[2], x[3]), (0.0, 0.0));

        let c = 0.4;
        let y = project_p2(array![c, c, c].view(), 1.5).unwrap();
        assert_eq!(y, tie_solution(3, &[0, 1, 2], 1.5, 3).unwrap());

        let z = project_p2(array![3.0_f64, 2.0, 1.0].view(), 1.3).unwrap();
        let (l1, l2) = norms(&z);
        assert!((l1 - 1.3).abs() < 1e-10 && (l2 - 1.0).abs() < 1e-10);

        assert!(matches!(
            project_p2(array![0.0_f64, 0.0].view(), 1.2),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn p2_negative_root_keeps_zero_coordinates_positive() {
        let x = project_p2(array![1.0_f64, 0.9, 0.0, 0.0].view(), 1.9).unwrap();
        let (l1, l2) = norms(&x);
        assert!((l1 - 1.9).abs() < 1e-10 && (l2 - 1.0).abs() < 1e-10);
        assert!(x[2] > 0.0 && x[3] > 0.0);
    }

    #[test]
    fn p3_cases() {
        let v = array![0.6_f64, 0.8];
        let x = project_p3(v.view(), 1.4).unwrap();
        assert!((&x - &v).iter().all(|d| d.abs() < 1e-12));
        let y = project_p3(array![3.0_f64, 1.0, 0.2].view(), 1.1).unwrap();
        let (l1, l2) = norms(&y);
        assert!(l1 <= 1.1 + 1e-10 && (l2 - 1.0).abs() < 1e-10);
        let c = 0.3;
        let z = project_p3(array![c, c, c, c].view(), 1.5).unwrap();
        assert_eq!(z, tie_solution(4, &[0, 1, 2, 3], 1.5, 4).unwrap());
    }

    #[test]
    fn q_project_cases() {
        let set = ConstraintSet::new(SetKind::Ball1Sphere2, 1.4).unwrap();
        let q = q_project(array![0.6_f64, 0.8].view(), set).unwrap();
        assert!((q[0] + 0.6).abs() < 1e-12 && (q[1] + 0.8).abs() < 1e-12);
        let v = array![3.0_f64, -2.0, 1.0];
        let s1 = ConstraintSet::new(SetKind::Ball1Ball2, 1.3).unwrap();
        let s3 = ConstraintSet::new(SetKind::Ball1Sphere2, 1.3).unwrap();
        assert_eq!(
            q_project(v.view(), s1).unwrap(),
            q_project(v.view(), s3).unwrap()
        );
    }

    #[test]
    fn mbnw_and_qasb_projections_agree() {
        let v = array![3.0_f64, -1.0, 0.5, 2.2, -0.1];
        for kind in [
            SetKind::Ball1Ball2,
            SetKind::Sphere1Sphere2,
            SetKind::Ball1Sphere2,
        ] {
            let set = ConstraintSet::new(kind, 1.4).unwrap();
            let a = Projector::new(set).project(v.view()).unwrap();
            let b = Projector::new(set)
                .with_method(RootMethod::Mbnw)
                .project(v.view())
                .unwrap();
            assert!((&a - &b).iter().all(|d| d.abs() < 1e-10), "{kind:?}");
        }
    }

    #[test]
    fn edge_radii() {
        let v = array![0.5_f64, -2.0, 1.0];
        // t = √n on Ω2 leaves only the sign pattern
        let x = project_p2(v.view(), 3f64.sqrt()).unwrap();
        let c = 1.0 / 3f64.sqrt();
        assert!((x[0] - c).abs() < 1e-15 && (x[1] + c).abs() < 1e-15);
        assert!(project_p2(v.view(), 2.0).is_err());
        assert!(project_p3(v.view(), 0.5).is_err());
        let y = project_p3(v.view(), 1.0).unwrap();
        assert!((y[1] + 1.0).abs() < 1e-12);
        // a tie with t just under 1 still returns a nonnegative unit vector
        let z = project_p3(array![1.0_f64, 1.0, 0.0].view(), 1.0 - 1e-13).unwrap();
        assert!(z.iter().all(|&x| x >= 0.0));
        assert!((z.dot(&z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            project_p1(array![1.0_f64].view(), 1.2),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            project_p1(array![1.0_f64, f64::NAN].view(), 1.2),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(project_p1(array![1.0_f64, 2.0].view(), -1.0).is_err());
    }
}

//! Piecewise descriptions of the threshold functions.
//!
//! Between two consecutive breakpoints the auxiliary functions are fixed
//! rational or quadratic expressions in `λ`, determined by the
//! [`BreakpointStats`] of the entries above the threshold. The root
//! finders only talk to a [`Profile`], so they run unchanged on a concrete
//! vector ([`SortedProfile`]) and on a synthetic list of pieces
//! ([`PiecewiseModel`]) that need not come from any vector.

use ndarray::ArrayView1;

use super::aux::{clipped_norms, BreakpointStats};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub trait Profile<T: Scalar> {
    /// Largest breakpoint; Ψ is undefined at and above it.
    fn top(&self) -> T;

    /// Upper end of the initial bisection interval for the Ψ root.
    fn search_upper(&self) -> T;

    /// `(l1, l2²)` at `λ`.
    fn terms(&self, lambda: T) -> (T, T);

    /// Stats over entries `≥ λ` (the piece whose closure contains `λ` from the left).
    fn stats_at(&self, lambda: T) -> BreakpointStats<T>;

    /// Stats over entries `> λ` (the piece just to the right of `λ`).
    fn stats_right_of(&self, lambda: T) -> BreakpointStats<T>;

    /// Smallest breakpoint strictly above `λ`.
    fn next_breakpoint_above(&self, lambda: T) -> Option<T>;

    /// Stats of the lowest piece, valid on `(−∞, min]`.
    fn all_stats(&self) -> BreakpointStats<T>;

    fn phi(&self, lambda: T, t: T) -> T {
        let (l1, l2sq) = self.terms(lambda);
        l1 * l1 - t * t * l2sq
    }

    fn psi_fun(&self, lambda: T, t: T) -> Result<T> {
        let (l1, l2sq) = self.terms(lambda);
        if !(l2sq > T::zero()) {
            return Err(Error::DegenerateLevel {
                level: lambda.as_f64(),
                top: self.top().as_f64(),
            });
        }
        Ok(l1 / l2sq.sqrt() - t)
    }

    /// True when some breakpoint lies strictly inside `(lo, up)`.
    fn breakpoint_between(&self, lo: T, up: T) -> bool {
        matches!(self.next_breakpoint_above(lo), Some(b) if b < up)
    }
}

/// A nonnegative vector sorted in decreasing order with prefix statistics.
#[derive(Debug, Clone)]
pub struct SortedProfile<'a, T> {
    raw: ArrayView1<'a, T>,
    desc: Vec<T>,
    prefix: Vec<BreakpointStats<T>>,
}

impl<'a, T: Scalar> SortedProfile<'a, T> {
    pub fn new(u: ArrayView1<'a, T>) -> Self {
        let mut desc: Vec<T> = u.to_vec();
        desc.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
        // prefix[k] covers desc[..k]; Welford keeps the spread accurate
        let mut prefix = Vec::with_capacity(desc.len() + 1);
        prefix.push(BreakpointStats::empty(T::infinity()));
        let (mut sum, mut sum_sq, mut mean, mut m2) = (T::zero(), T::zero(), T::zero(), T::zero());
        for (k, &x) in desc.iter().enumerate() {
            sum = sum + x;
            sum_sq = sum_sq + x * x;
            let d = x - mean;
            mean = mean + d / T::count(k + 1);
            m2 = m2 + d * (x - mean);
            prefix.push(BreakpointStats {
                count: k + 1,
                sum,
                sum_sq,
                spread: T::count(k + 1) * m2.max(T::zero()),
                level: x,
            });
        }
        Self {
            raw: u,
            desc,
            prefix,
        }
    }

    pub fn len(&self) -> usize {
        self.desc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.desc.is_empty()
    }

    /// Entries in decreasing order.
    pub fn sorted(&self) -> &[T] {
        &self.desc
    }

    /// Number of entries equal to the maximum.
    pub fn top_count(&self) -> usize {
        match self.desc.first() {
            Some(&top) => self.desc.iter().take_while(|&&x| x == top).count(),
            None => 0,
        }
    }

    /// Second largest distinct value, if any.
    pub fn second_max(&self) -> Option<T> {
        let top = *self.desc.first()?;
        self.desc.iter().copied().find(|&x| x < top)
    }

    fn count_ge(&self, lambda: T) -> usize {
        self.desc.partition_point(|&x| x >= lambda)
    }

    fn count_gt(&self, lambda: T) -> usize {
        self.desc.partition_point(|&x| x > lambda)
    }

    fn with_level(&self, k: usize, lambda: T) -> BreakpointStats<T> {
        BreakpointStats {
            level: lambda,
            ..self.prefix[k]
        }
    }
}

impl<T: Scalar> Profile<T> for SortedProfile<'_, T> {
    fn top(&self) -> T {
        self.desc.first().copied().unwrap_or(T::zero())
    }

    fn search_upper(&self) -> T {
        self.second_max().unwrap_or_else(|| self.top())
    }

    fn terms(&self, lambda: T) -> (T, T) {
        clipped_norms(self.raw, lambda)
    }

    fn stats_at(&self, lambda: T) -> BreakpointStats<T> {
        self.with_level(self.count_ge(lambda), lambda)
    }

    fn stats_right_of(&self, lambda: T) -> BreakpointStats<T> {
        self.with_level(self.count_gt(lambda), lambda)
    }

    fn next_breakpoint_above(&self, lambda: T) -> Option<T> {
        let k = self.count_gt(lambda);
        if k == 0 {
            None
        } else {
            Some(self.desc[k - 1])
        }
    }

    fn all_stats(&self) -> BreakpointStats<T> {
        let n = self.desc.len();
        self.with_level(n, self.desc.last().copied().unwrap_or(T::zero()))
    }
}

/// Synthetic piecewise profile given directly by per-piece statistics.
///
/// `pieces[j] = (upper_j, stats_j)` with `upper` strictly decreasing. Piece
/// `j` is valid on `(upper_{j+1}, upper_j]`; the last piece extends to
/// `−∞`. Values of `λ` above `upper_0` have no active entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseModel<T> {
    pieces: Vec<(T, BreakpointStats<T>)>,
    search_upper: T,
}

impl<T: Scalar> PiecewiseModel<T> {
    pub fn new(pieces: Vec<(T, BreakpointStats<T>)>, search_upper: T) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidConfig(
                "piecewise model needs at least one piece".into(),
            ));
        }
        for w in pieces.windows(2) {
            if !(w[0].0 > w[1].0) {
                return Err(Error::InvalidConfig(
                    "piece upper bounds must decrease".into(),
                ));
            }
        }
        if !(search_upper <= pieces[0].0) {
            return Err(Error::InvalidConfig(
                "search bound above the top piece".into(),
            ));
        }
        Ok(Self {
            pieces,
            search_upper,
        })
    }

    /// The two-piece profile built from `(a, b, c)` triples: the first piece
    /// is valid on `(split, top]`, the second below `split`.
    pub fn two_piece(
        upper: (T, usize, T, T),
        lower: (T, usize, T, T),
        search_upper: T,
    ) -> Result<Self> {
        let hi = BreakpointStats::from_sums(upper.1, upper.2, upper.3, upper.0);
        let lo = BreakpointStats::from_sums(lower.1, lower.2, lower.3, lower.0);
        Self::new(vec![(upper.0, hi), (lower.0, lo)], search_upper)
    }

    pub fn pieces(&self) -> &[(T, BreakpointStats<T>)] {
        &self.pieces
    }

    fn piece_index(&self, lambda: T) -> Option<usize> {
        if lambda > self.pieces[0].0 {
            return None;
        }
        // last j with upper_j >= λ
        let k = self.pieces.partition_point(|p| p.0 >= lambda);
        Some(k - 1)
    }
}

impl<T: Scalar> Profile<T> for PiecewiseModel<T> {
    fn top(&self) -> T {
        self.pieces[0].0
    }

    fn search_upper(&self) -> T {
        self.search_upper
    }

    fn terms(&self, lambda: T) -> (T, T) {
        self.stats_at(lambda).terms(lambda)
    }

    fn stats_at(&self, lambda: T) -> BreakpointStats<T> {
        match self.piece_index(lambda) {
            Some(j) => BreakpointStats {
                level: lambda,
                ..self.pieces[j].1
            },
            None => BreakpointStats::empty(lambda),
        }
    }

    fn stats_right_of(&self, lambda: T) -> BreakpointStats<T> {
        if lambda >= self.pieces[0].0 {
            return BreakpointStats::empty(lambda);
        }
        // last j with upper_j > λ
        let k = self.pieces.partition_point(|p| p.0 > lambda);
        BreakpointStats {
            level: lambda,
            ..self.pieces[k - 1].1
        }
    }

    fn next_breakpoint_above(&self, lambda: T) -> Option<T> {
        self.pieces.iter().rev().map(|p| p.0).find(|&b| b > lambda)
    }

    fn all_stats(&self) -> BreakpointStats<T> {
        self.pieces.last().expect("nonempty").1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn sorted_profile_stats() {
        let u = array![1.0_f64, 3.0, 2.0, 3.0, 0.0];
        let p = SortedProfile::new(u.view());
        assert_eq!(p.top(), 3.0);
        assert_eq!(p.top_count(), 2);
        assert_eq!(p.search_upper(), 2.0);
        assert_eq!(p.stats_at(2.0).count, 3);
        assert_eq!(p.stats_right_of(2.0).count, 2);
        assert_eq!(p.next_breakpoint_above(1.5), Some(2.0));
        assert_eq!(p.next_breakpoint_above(2.0), Some(3.0));
        assert_eq!(p.next_breakpoint_above(3.0), None);
        assert_eq!(p.all_stats().count, 5);
        assert!(p.breakpoint_between(0.5, 2.5));
        assert!(!p.breakpoint_between(1.0, 2.0));
    }

    #[test]
    fn piecewise_model_lookup() {
        let m = PiecewiseModel::<f64>::two_piece((6.0, 2, 9.0, 41.0), (3.5, 10, 33.0, 109.0), 6.0)
            .unwrap();
        assert_eq!(m.stats_at(3.0).count, 10);
        assert_eq!(m.stats_at(3.5).count, 10);
        assert_eq!(m.stats_right_of(3.5).count, 2);
        assert_eq!(m.stats_at(4.0).count, 2);
        assert_eq!(m.stats_at(7.0).count, 0);
        assert!((m.psi_fun(3.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((m.psi_fun(4.0, 2.0).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(m.next_breakpoint_above(3.0), Some(3.5));
        assert_eq!(m.next_breakpoint_above(3.5), Some(6.0));
    }
}

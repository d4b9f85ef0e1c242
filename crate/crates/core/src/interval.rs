//! Finite unions of disjoint closed intervals on the real line.

use crate::error::{MdpError, Result};
use crate::scalar::Scalar;

/// Fragments shorter than this are dropped and gaps narrower than this are merged.
pub const MERGE_EPS: f64 = 1e-12;

/// Closed interval `[lo, hi]`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(y: T) -> Self {
        Self { lo: y, hi: y }
    }

    pub fn unbounded() -> Self {
        Self {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> T {
        (self.lo + self.hi) / T::lit(2.0)
    }

    pub fn contains(&self, y: T) -> bool {
        self.lo <= y && y <= self.hi
    }

    /// Intersection with `bounds`, or `None` when they are disjoint.
    pub fn clip(&self, bounds: Interval<T>) -> Option<Self> {
        let lo = self.lo.max(bounds.lo);
        let hi = self.hi.min(bounds.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }
}

/// Sorted union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet<T> {
    pieces: Vec<Interval<T>>,
}

impl<T: Scalar> IntervalSet<T> {
    pub fn empty() -> Self {
        Self { pieces: Vec::new() }
    }

    /// The single interval `[lo, hi]`. A point interval is kept as is.
    pub fn from_interval(interval: Interval<T>) -> Self {
        Self {
            pieces: vec![interval],
        }
    }

    /// Builds a normalized set from arbitrary intervals (overlaps are merged).
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval<T>>) -> Self {
        let mut pieces: Vec<_> = intervals.into_iter().collect();
        pieces.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .expect("interval endpoints are not NaN")
        });
        let mut set = Self { pieces };
        set.merge_gaps();
        set
    }

    /// Pieces in ascending order.
    pub fn intervals(&self) -> &[Interval<T>] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn total_length(&self) -> T {
        self.pieces.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, y: T) -> bool {
        self.pieces.iter().any(|p| p.contains(y))
    }

    /// `self − cut`. The complement keeps the cut's endpoints, so every
    /// remaining piece stays closed.
    pub fn subtract(&self, cut: Interval<T>) -> Self {
        let eps = T::tol(MERGE_EPS);
        let mut pieces = Vec::with_capacity(self.pieces.len() + 1);
        for piece in &self.pieces {
            if cut.hi < piece.lo || cut.lo > piece.hi {
                pieces.push(*piece);
                continue;
            }
            if cut.lo > piece.lo && cut.lo - piece.lo >= eps {
                pieces.push(Interval {
                    lo: piece.lo,
                    hi: cut.lo,
                });
            }
            if cut.hi < piece.hi && piece.hi - cut.hi >= eps {
                pieces.push(Interval {
                    lo: cut.hi,
                    hi: piece.hi,
                });
            }
        }
        let mut set = Self { pieces };
        set.merge_gaps();
        set
    }

    /// Midpoint of the piece with the largest lower endpoint (the first piece
    /// when sorted in descending order).
    pub fn first_interval_midpoint(&self) -> Result<T> {
        self.pieces
            .last()
            .map(Interval::midpoint)
            .ok_or(MdpError::EmptyDomain)
    }

    fn merge_gaps(&mut self) {
        let eps = T::tol(MERGE_EPS);
        let mut merged: Vec<Interval<T>> = Vec::with_capacity(self.pieces.len());
        for piece in self.pieces.drain(..) {
            match merged.last_mut() {
                Some(prev) if piece.lo - prev.hi < eps => prev.hi = prev.hi.max(piece.hi),
                _ => merged.push(piece),
            }
        }
        self.pieces = merged;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pieces: &[(f64, f64)]) -> IntervalSet<f64> {
        IntervalSet::from_intervals(pieces.iter().map(|&(a, b)| Interval::new(a, b)))
    }

    #[test]
    fn subtraction_examples() {
        let s = set(&[(0.0, 10.0)]);
        assert_eq!(
            s.subtract(Interval::new(2.0, 4.0)),
            set(&[(0.0, 2.0), (4.0, 10.0)])
        );
        assert!(s.subtract(Interval::new(-1.0, 11.0)).is_empty());
        let two = set(&[(0.0, 2.0), (4.0, 10.0)]);
        assert_eq!(
            two.subtract(Interval::new(1.0, 5.0)),
            set(&[(0.0, 1.0), (5.0, 10.0)])
        );
    }

    #[test]
    fn midpoint_examples() {
        assert_eq!(set(&[(0.0, 10.0)]).first_interval_midpoint().unwrap(), 5.0);
        assert_eq!(
            set(&[(0.0, 2.0), (4.0, 10.0)])
                .first_interval_midpoint()
                .unwrap(),
            7.0
        );
        assert_eq!(
            IntervalSet::from_interval(Interval::point(-3.0))
                .first_interval_midpoint()
                .unwrap(),
            -3.0
        );
        assert_eq!(
            IntervalSet::<f64>::empty().first_interval_midpoint(),
            Err(MdpError::EmptyDomain)
        );
    }

    #[test]
    fn emptiness_and_length() {
        let e = IntervalSet::<f64>::empty();
        assert!(e.is_empty());
        assert_eq!(e.total_length(), 0.0);
        let one = set(&[(0.0, 1.0)]);
        assert!(!one.is_empty());
        assert_eq!(one.total_length(), 1.0);
        assert_eq!(set(&[(0.0, 1.0), (2.0, 4.0)]).total_length(), 3.0);
    }

    #[test]
    fn tiny_fragments_and_gaps() {
        let s = set(&[(0.0, 1.0)]);
        assert_eq!(s.subtract(Interval::new(1e-14, 0.5)), set(&[(0.5, 1.0)]));
        assert_eq!(set(&[(0.0, 1.0), (1.0 + 1e-14, 2.0)]), set(&[(0.0, 2.0)]));
        let pt = IntervalSet::from_interval(Interval::point(2.0));
        assert!(pt
            .subtract(Interval::new(2.0 - 1e-9, 2.0 + 1e-9))
            .is_empty());
        assert_eq!(pt.subtract(Interval::new(3.0, 4.0)), pt);
    }

    #[test]
    fn half_line_cut() {
        let s = set(&[(-5.0, 5.0)]);
        let cut = Interval {
            lo: f64::NEG_INFINITY,
            hi: 1.0,
        };
        assert_eq!(s.subtract(cut), set(&[(1.0, 5.0)]));
    }

    fn cut_strategy() -> impl Strategy<Value = (f64, f64)> {
        (-12.0f64..12.0, 0.0f64..6.0).prop_map(|(lo, w)| (lo, lo + w))
    }

    proptest! {
        #[test]
        fn subtraction_invariants(cuts in proptest::collection::vec(cut_strategy(), 1..8)) {
            let mut s = set(&[(-10.0, 10.0)]);
            for &(lo, hi) in &cuts {
                let cut = Interval::new(lo, hi);
                let next = s.subtract(cut);
                prop_assert!(next.total_length() <= s.total_length() + 1e-12);
                // sorted and disjoint
                for w in next.intervals().windows(2) {
                    prop_assert!(w[0].hi < w[1].lo);
                }
                // no interior point of the cut survives
                for k in 1..20 {
                    let y = lo + (hi - lo) * k as f64 / 20.0;
                    if y > lo + 1e-9 && y < hi - 1e-9 {
                        prop_assert!(!next.contains(y));
                    }
                }
                prop_assert_eq!(next.subtract(cut), next.clone());
                s = next;
            }
        }

        #[test]
        fn order_of_cuts_is_irrelevant(a in cut_strategy(), b in cut_strategy()) {
            let s = set(&[(-10.0, 10.0)]);
            let ca = Interval::new(a.0, a.1);
            let cb = Interval::new(b.0, b.1);
            let ab = s.subtract(ca).subtract(cb);
            let ba = s.subtract(cb).subtract(ca);
            prop_assert_eq!(ab.len(), ba.len());
            for (x, y) in ab.intervals().iter().zip(ba.intervals()) {
                prop_assert!((x.lo - y.lo).abs() < 1e-12 && (x.hi - y.hi).abs() < 1e-12);
            }
        }
    }
}

//! Intervals with explicit endpoint flags, and finite unions of them.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

/// Preimage of an interval under an affine map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preimage {
    Empty,
    Everything,
    Interval(Interval),
}

impl Interval {
    /// `None` when the flags make the set empty.
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Option<Interval> {
        match lo.cmp(&hi) {
            Ordering::Less => Some(Interval { lo, hi, lo_closed, hi_closed }),
            Ordering::Equal if lo_closed && hi_closed => Some(Interval { lo, hi, lo_closed, hi_closed }),
            _ => None,
        }
    }

    /// `[lo, hi)`.
    pub fn closed_open(lo: Rational, hi: Rational) -> Interval {
        Interval::new(lo, hi, true, false).expect("closed_open needs lo < hi")
    }

    pub fn closed(lo: Rational, hi: Rational) -> Interval {
        Interval::new(lo, hi, true, true).expect("closed needs lo <= hi")
    }

    pub fn point(x: Rational) -> Interval {
        Interval { lo: x.clone(), hi: x, lo_closed: true, hi_closed: true }
    }

    pub fn unit() -> Interval {
        Interval::closed_open(Rational::zero(), num_traits::One::one())
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    pub fn interior_contains(&self, x: &Rational) -> bool {
        *x > self.lo && *x < self.hi
    }

    pub fn closure_contains(&self, x: &Rational) -> bool {
        *x >= self.lo && *x <= self.hi
    }

    /// Distance from `x` to the closure.
    pub fn distance_to(&self, x: &Rational) -> Rational {
        if *x < self.lo {
            &self.lo - x
        } else if *x > self.hi {
            x - &self.hi
        } else {
            Rational::zero()
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }

    pub fn meets(&self, other: &Interval) -> bool {
        self.intersect(other).is_some()
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.intersect(other).as_ref() == Some(self)
    }

    /// True when every point of `self` is strictly below every point of `other`.
    pub fn precedes(&self, other: &Interval) -> bool {
        match self.hi.cmp(&other.lo) {
            Ordering::Less => true,
            Ordering::Equal => !(self.hi_closed && other.lo_closed),
            Ordering::Greater => false,
        }
    }

    /// Does the open interval `(u, v)` meet this interval? Empty if `u >= v`.
    pub fn meets_open(&self, u: &Rational, v: &Rational) -> bool {
        u < v && *v > self.lo && *u < self.hi
    }

    /// Is the open interval `(u, v)` contained in this interval?
    pub fn contains_open(&self, u: &Rational, v: &Rational) -> bool {
        u >= v || (*u >= self.lo && *v <= self.hi)
    }

    /// Image under `x -> a*x + b`.
    pub fn affine_image(&self, a: &Rational, b: &Rational) -> Interval {
        if a.is_zero() {
            return Interval::point(b.clone());
        }
        let lo = a * &self.lo + b;
        let hi = a * &self.hi + b;
        if a.is_positive() {
            Interval { lo, hi, lo_closed: self.lo_closed, hi_closed: self.hi_closed }
        } else {
            Interval { lo: hi, hi: lo, lo_closed: self.hi_closed, hi_closed: self.lo_closed }
        }
    }

    /// `{x : a*x + b in self}`.
    pub fn affine_preimage(&self, a: &Rational, b: &Rational) -> Preimage {
        if a.is_zero() {
            return if self.contains(b) { Preimage::Everything } else { Preimage::Empty };
        }
        let lo = (&self.lo - b) / a;
        let hi = (&self.hi - b) / a;
        let iv = if a.is_positive() {
            Interval { lo, hi, lo_closed: self.lo_closed, hi_closed: self.hi_closed }
        } else {
            Interval { lo: hi, hi: lo, lo_closed: self.hi_closed, hi_closed: self.lo_closed }
        };
        Preimage::Interval(iv)
    }

    fn start_key(&self) -> (Rational, bool) {
        (self.lo.clone(), !self.lo_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_degenerate() {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Sorted, pairwise disjoint, maximally merged intervals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet { parts: Vec::new() }
    }

    pub fn from_interval(iv: Interval) -> IntervalSet {
        IntervalSet { parts: vec![iv] }
    }

    pub fn from_intervals<I: IntoIterator<Item = Interval>>(items: I) -> IntervalSet {
        let mut items: Vec<Interval> = items.into_iter().collect();
        items.sort_by_key(|a| a.start_key());
        let mut parts: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            if let Some(last) = parts.last_mut() {
                let touches = match last.hi.cmp(&iv.lo) {
                    Ordering::Greater => true,
                    Ordering::Equal => last.hi_closed || iv.lo_closed,
                    Ordering::Less => false,
                };
                if touches {
                    match last.hi.cmp(&iv.hi) {
                        Ordering::Less => {
                            last.hi = iv.hi;
                            last.hi_closed = iv.hi_closed;
                        }
                        Ordering::Equal => last.hi_closed |= iv.hi_closed,
                        Ordering::Greater => {}
                    }
                    continue;
                }
            }
            parts.push(iv);
        }
        IntervalSet { parts }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn measure(&self) -> Rational {
        self.parts.iter().map(Interval::length).sum()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.parts.iter().chain(other.parts.iter()).cloned())
    }

    pub fn intersect_interval(&self, iv: &Interval) -> IntervalSet {
        IntervalSet::from_intervals(self.parts.iter().filter_map(|p| p.intersect(iv)))
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(
            self.parts.iter().flat_map(|p| other.parts.iter().filter_map(move |q| p.intersect(q))),
        )
    }

    pub fn meets(&self, other: &IntervalSet) -> bool {
        self.parts.iter().any(|p| other.parts.iter().any(|q| p.meets(q)))
    }

    pub fn meets_interval(&self, iv: &Interval) -> bool {
        self.parts.iter().any(|p| p.meets(iv))
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<Interval> {
        let first = self.parts.first()?;
        let last = self.parts.last()?;
        Interval::new(first.lo.clone(), last.hi.clone(), first.lo_closed, last.hi_closed)
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intersect(other) == *self
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    #[test]
    fn flags_and_membership() {
        let iv = Interval::new(rat(1, 4), rat(1, 2), false, true).unwrap();
        assert!(!iv.contains(&rat(1, 4)));
        assert!(iv.contains(&rat(1, 2)));
        assert!(Interval::new(int(1), int(1), true, false).is_none());
        assert!(Interval::new(int(1), int(0), true, true).is_none());
    }

    #[test]
    fn intersections_respect_flags() {
        let a = Interval::closed_open(int(0), rat(1, 2));
        let b = Interval::closed_open(rat(1, 2), int(1));
        assert!(a.intersect(&b).is_none());
        assert!(a.precedes(&b));
        let c = Interval::closed(rat(1, 4), rat(1, 2));
        assert_eq!(c.intersect(&b), Some(Interval::point(rat(1, 2))));
        assert!(!c.precedes(&b));
    }

    #[test]
    fn negative_slope_flips_flags() {
        let iv = Interval::closed_open(rat(1, 2), int(1));
        let img = iv.affine_image(&rat(-3, 4), &int(1));
        assert_eq!(img, Interval::new(rat(1, 4), rat(5, 8), false, true).unwrap());
        match img.affine_preimage(&rat(-3, 4), &int(1)) {
            Preimage::Interval(back) => assert_eq!(back, iv),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn set_merging() {
        let s = IntervalSet::from_intervals([
            Interval::closed_open(rat(1, 2), int(1)),
            Interval::closed_open(int(0), rat(1, 2)),
        ]);
        assert_eq!(s.parts(), &[Interval::unit()]);
        let gap = IntervalSet::from_intervals([
            Interval::closed_open(int(0), rat(1, 2)),
            Interval::new(rat(1, 2), int(1), false, false).unwrap(),
        ]);
        assert_eq!(gap.len(), 2);
        assert_eq!(gap.measure(), int(1));
        assert!(!gap.contains(&rat(1, 2)));
        assert_eq!(gap.hull(), Some(Interval::new(int(0), int(1), true, false).unwrap()));
    }
}

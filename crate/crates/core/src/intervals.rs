//! Finite unions of closed intervals on the real line.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]`, serialized as a `[lo, hi]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<(f64, f64)> for Interval {
    fn from((lo, hi): (f64, f64)) -> Self {
        Interval { lo, hi }
    }
}

impl From<Interval> for (f64, f64) {
    fn from(iv: Interval) -> Self {
        (iv.lo, iv.hi)
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite("interval endpoint"));
        }
        if lo > hi {
            return Err(Error::InvalidArgument(format!(
                "interval endpoints out of order: [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self> {
        Interval::new(x, x)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Sorted, pairwise disjoint closed intervals. Touching or overlapping
/// input intervals are merged on construction, so consecutive members
/// always satisfy `hi_i < lo_{i+1}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// Validates every interval and normalizes the union.
    pub fn new<I: IntoIterator<Item = Interval>>(intervals: I) -> Result<Self> {
        let v: Vec<Interval> = intervals.into_iter().collect();
        for iv in &v {
            Interval::new(iv.lo, iv.hi)?;
        }
        Ok(Self::from_unsorted(v))
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&p| Interval::from(p)))
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Ok(IntervalSet {
            intervals: vec![Interval::new(lo, hi)?],
        })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::single(x, x)
    }

    /// Normalizes intervals already known to be finite and ordered.
    pub(crate) fn from_unsorted(mut v: Vec<Interval>) -> Self {
        v.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        Self::from_sorted(v)
    }

    /// Merges a list sorted by lower endpoint.
    pub(crate) fn from_sorted(v: Vec<Interval>) -> Self {
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.intervals.iter()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn max_length(&self) -> f64 {
        self.intervals
            .iter()
            .map(Interval::length)
            .fold(0.0, f64::max)
    }

    pub fn hull(&self) -> Option<Interval> {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(a), Some(b)) => Some(Interval { lo: a.lo, hi: b.hi }),
            _ => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.intervals);
        v.extend_from_slice(&other.intervals);
        Self::from_unsorted(v)
    }

    /// Widens every interval by `delta` on both sides.
    pub fn dilate(&self, delta: f64) -> IntervalSet {
        let v = self
            .intervals
            .iter()
            .map(|iv| Interval {
                lo: iv.lo - delta,
                hi: iv.hi + delta,
            })
            .collect();
        Self::from_sorted(v)
    }

    pub fn translate(&self, t: f64) -> IntervalSet {
        let v = self
            .intervals
            .iter()
            .map(|iv| Interval {
                lo: iv.lo + t,
                hi: iv.hi + t,
            })
            .collect();
        Self::from_sorted(v)
    }

    /// Multiplies every point by `c > 0`.
    pub fn scale(&self, c: f64) -> IntervalSet {
        let v = self
            .intervals
            .iter()
            .map(|iv| Interval {
                lo: iv.lo * c,
                hi: iv.hi * c,
            })
            .collect();
        Self::from_sorted(v)
    }

    /// True when every interval of `self` sits inside a single interval of `other`.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.intervals.iter().all(|iv| {
            let idx = other.intervals.partition_point(|o| o.hi < iv.lo);
            other
                .intervals
                .get(idx)
                .is_some_and(|o| o.contains_interval(iv))
        })
    }
}

impl<'a> IntoIterator for &'a IntervalSet {
    type Item = &'a Interval;
    type IntoIter = std::slice::Iter<'a, Interval>;

    fn into_iter(self) -> Self::IntoIter {
        self.intervals.iter()
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(pairs: &[(f64, f64)]) -> IntervalSet {
        IntervalSet::from_pairs(pairs).unwrap()
    }

    #[test]
    fn normalization_merges_touching_and_overlapping() {
        let s = set(&[(2.0, 3.0), (0.0, 1.0), (1.0, 1.5), (2.5, 4.0)]);
        assert_eq!(s, set(&[(0.0, 1.5), (2.0, 4.0)]));
        assert_eq!(s.len(), 2);
        assert_eq!(s.total_length(), 3.5);
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(IntervalSet::from_pairs(&[(1.0, 0.0)]).is_err());
        assert!(IntervalSet::from_pairs(&[(0.0, f64::NAN)]).is_err());
    }

    #[test]
    fn membership_and_subsets() {
        let s = set(&[(0.0, 1.0), (2.0, 3.0)]);
        assert!(s.contains(0.0) && s.contains(3.0) && s.contains(2.5));
        assert!(!s.contains(1.5) && !s.contains(-0.1));
        assert!(set(&[(0.2, 0.4), (2.0, 2.0)]).is_subset_of(&s));
        assert!(!set(&[(0.5, 2.5)]).is_subset_of(&s));
        assert!(IntervalSet::empty().is_subset_of(&s));
    }

    #[test]
    fn json_shape_is_pairs() {
        let s = set(&[(-2.0, 5.0)]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[-2.0,5.0]]");
        let back: IntervalSet = serde_json::from_str("[[-2.0,5.0]]").unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn normalized_sets_are_sorted_and_disjoint(
            raw in prop::collection::vec((-50.0f64..50.0, 0.0f64..5.0), 1..40)
        ) {
            let s = IntervalSet::new(raw.iter().map(|&(a, w)| Interval { lo: a, hi: a + w })).unwrap();
            for w in s.intervals().windows(2) {
                prop_assert!(w[0].hi < w[1].lo);
            }
            for &(a, w) in &raw {
                prop_assert!(s.contains(a) && s.contains(a + w));
            }
        }
    }
}

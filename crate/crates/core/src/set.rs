//! Confidence sets as finite unions of disjoint closed intervals.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{ModeError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(ModeError::InvalidData(format!(
                "interval [{lo}, {hi}] has lo > hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Sorted, pairwise disjoint closed intervals with `hi_k < lo_{k+1}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfidenceSet {
    intervals: Vec<Interval>,
}

impl ConfidenceSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self {
            intervals: vec![Interval::new(lo, hi)?],
        })
    }

    /// Canonicalizes raw `(lo, hi)` pairs: sorts them and merges
    /// overlapping or touching intervals.
    pub fn from_pairs<I>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let intervals = raw
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(intervals))
    }

    pub fn from_intervals(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals
            .iter()
            .all(|iv| iv.lo.is_finite() && iv.hi.is_finite())
    }

    /// Total length; infinite when some interval is unbounded.
    pub fn width(&self) -> f64 {
        self.intervals.iter().map(Interval::width).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        // first interval with lo > x, then check its predecessor
        let idx = self.intervals.partition_point(|iv| iv.lo <= x);
        idx > 0 && self.intervals[idx - 1].contains(x)
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<Interval> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(Interval {
            lo: first.lo,
            hi: last.hi,
        })
    }

    /// Minkowski dilation `{x : dist(x, S) ≤ h}`.
    ///
    /// # Panics
    ///
    /// If `h` is not a positive finite number.
    pub fn dilate(&self, h: f64) -> Self {
        assert!(h > 0.0 && h.is_finite(), "dilation radius must be positive");
        Self::from_intervals(
            self.intervals
                .iter()
                .map(|iv| Interval {
                    lo: iv.lo - h,
                    hi: iv.hi + h,
                })
                .collect(),
        )
    }

    /// True if every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &ConfidenceSet) -> bool {
        self.intervals.iter().all(|iv| {
            let idx = other.intervals.partition_point(|o| o.lo <= iv.lo);
            idx > 0 && {
                let o = other.intervals[idx - 1];
                o.lo <= iv.lo && iv.hi <= o.hi
            }
        })
    }

    /// Attaches the reporting metadata used by the JSON form.
    pub fn report<'a>(&'a self, alpha: f64, method: &'a str) -> SetReport<'a> {
        SetReport {
            set: self,
            alpha,
            method,
        }
    }
}

/// JSON view `{"intervals": [[lo, hi], ...], "width": w, "alpha": a, "method": name}`.
#[derive(Debug, Clone, Copy)]
pub struct SetReport<'a> {
    pub set: &'a ConfidenceSet,
    pub alpha: f64,
    pub method: &'a str,
}

impl Serialize for SetReport<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.set.intervals.iter().map(|iv| [iv.lo, iv.hi]).collect();
        let mut st = serializer.serialize_struct("ConfidenceSet", 4)?;
        st.serialize_field("intervals", &pairs)?;
        st.serialize_field("width", &self.set.width())?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("method", self.method)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(set: &ConfidenceSet) -> Vec<(f64, f64)> {
        set.intervals().iter().map(|iv| (iv.lo, iv.hi)).collect()
    }

    #[test]
    fn canonical_form() {
        let s = ConfidenceSet::from_pairs([(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(pairs(&s), vec![(0.0, 2.0)]);
        let s = ConfidenceSet::from_pairs([(3.0, 4.0), (0.0, 1.0)]).unwrap();
        assert_eq!(pairs(&s), vec![(0.0, 1.0), (3.0, 4.0)]);
        let s = ConfidenceSet::from_pairs(Vec::new()).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.width(), 0.0);
        assert!(ConfidenceSet::from_pairs([(2.0, 1.0)]).is_err());
    }

    #[test]
    fn dilation_examples() {
        let s = ConfidenceSet::from_pairs([(0.0, 1.0)]).unwrap().dilate(0.5);
        assert_eq!(pairs(&s), vec![(-0.5, 1.5)]);
        let s = ConfidenceSet::from_pairs([(0.0, 1.0), (1.4, 2.0)])
            .unwrap()
            .dilate(0.3);
        assert_eq!(pairs(&s), vec![(-0.3, 2.3)]);
        assert!(ConfidenceSet::empty().dilate(1.0).is_empty());
    }

    #[test]
    fn closed_membership() {
        let s = ConfidenceSet::from_pairs([(0.0, 1.0), (3.0, 4.0)]).unwrap();
        for x in [0.0, 1.0, 3.0, 4.0, 0.5] {
            assert!(s.contains(x));
        }
        for x in [-1e-12, 1.5, 2.999, 4.0001] {
            assert!(!s.contains(x));
        }
    }

    #[test]
    fn json_schema() {
        let s = ConfidenceSet::from_pairs([(0.0, 1.0), (2.0, 2.5)]).unwrap();
        let v = serde_json::to_value(s.report(0.05, "m1")).unwrap();
        assert_eq!(v["intervals"], serde_json::json!([[0.0, 1.0], [2.0, 2.5]]));
        assert_eq!(v["width"], 1.5);
        assert_eq!(v["alpha"], 0.05);
        assert_eq!(v["method"], "m1");
    }

    fn raw_intervals() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-50.0f64..50.0, 0.0f64..5.0), 0..12)
            .prop_map(|v| v.into_iter().map(|(lo, w)| (lo, lo + w)).collect())
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(raw in raw_intervals()) {
            let once = ConfidenceSet::from_pairs(raw).unwrap();
            let twice = ConfidenceSet::from_pairs(pairs(&once)).unwrap();
            prop_assert_eq!(&once, &twice);
            for w in once.intervals().windows(2) {
                prop_assert!(w[0].hi < w[1].lo);
            }
        }

        #[test]
        fn dilation_composes(raw in raw_intervals(), a in 0.01f64..3.0, b in 0.01f64..3.0) {
            let s = ConfidenceSet::from_pairs(raw).unwrap();
            let lhs = s.dilate(a).dilate(b);
            let rhs = s.dilate(a + b);
            prop_assert_eq!(lhs.len(), rhs.len());
            for (l, r) in lhs.intervals().iter().zip(rhs.intervals()) {
                prop_assert!((l.lo - r.lo).abs() < 1e-9 && (l.hi - r.hi).abs() < 1e-9);
            }
        }

        #[test]
        fn dilation_width_bound(raw in raw_intervals(), h in 0.01f64..3.0) {
            let s = ConfidenceSet::from_pairs(raw).unwrap();
            let d = s.dilate(h);
            let bound = s.width() + 2.0 * h * s.len() as f64;
            prop_assert!(d.width() <= bound + 1e-9);
            if d.len() == s.len() {
                prop_assert!((d.width() - bound).abs() < 1e-9);
            }
            prop_assert!(s.is_subset_of(&d));
        }
    }
}

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use super::{CarId, Lane, ModelError};
use crate::rational::{self, Rational};

/// Length of an interval: `t - r` for extents, cardinality for lane intervals.
pub trait Measure {
    type Output;
    fn measure(&self) -> Self::Output;
}

/// Closed rational interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Extent {
    lo: Rational,
    hi: Rational,
}

impl Extent {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, ModelError> {
        if lo > hi {
            return Err(ModelError::BadExtent {
                lo: rational::format(&lo),
                hi: rational::format(&hi),
            });
        }
        Ok(Extent { lo, hi })
    }

    pub fn from_ints(lo: i64, hi: i64) -> Result<Self, ModelError> {
        Extent::new(rational::int(lo), rational::int(hi))
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_subinterval_of(&self, other: &Extent) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Intersection of two closed intervals; `None` when disjoint.
    pub fn intersect(&self, other: &Extent) -> Option<Extent> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then_some(Extent { lo, hi })
    }

    pub fn shift(&self, by: &Rational) -> Extent {
        Extent {
            lo: &self.lo + by,
            hi: &self.hi + by,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

impl Measure for Extent {
    type Output = Rational;
    fn measure(&self) -> Rational {
        &self.hi - &self.lo
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", rational::Show(&self.lo), rational::Show(&self.hi))
    }
}

/// Discrete convex interval of lanes, possibly empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LaneInterval(Option<(Lane, Lane)>);

impl LaneInterval {
    pub const EMPTY: LaneInterval = LaneInterval(None);

    pub fn new(lo: Lane, hi: Lane) -> Result<Self, ModelError> {
        if lo > hi {
            return Err(ModelError::BadLaneInterval { lo, hi });
        }
        Ok(LaneInterval(Some((lo, hi))))
    }

    pub fn single(lane: Lane) -> Self {
        LaneInterval(Some((lane, lane)))
    }

    /// The interval covering exactly `lanes`, if they are contiguous.
    pub fn from_set(lanes: &BTreeSet<Lane>) -> Option<Self> {
        let (Some(&lo), Some(&hi)) = (lanes.first(), lanes.last()) else {
            return Some(LaneInterval::EMPTY);
        };
        (hi - lo + 1 == lanes.len() as Lane).then_some(LaneInterval(Some((lo, hi))))
    }

    pub fn bounds(&self) -> Option<(Lane, Lane)> {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn contains(&self, lane: Lane) -> bool {
        matches!(self.0, Some((lo, hi)) if lo <= lane && lane <= hi)
    }

    pub fn lanes(&self) -> impl Iterator<Item = Lane> {
        let (lo, hi) = match self.0 {
            Some((lo, hi)) => (lo, hi + 1),
            None => (0, 0),
        };
        lo..hi
    }

    pub fn to_set(&self) -> BTreeSet<Lane> {
        self.lanes().collect()
    }

    pub fn is_subinterval_of(&self, other: &LaneInterval) -> bool {
        match (self.0, other.0) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some((a, b)), Some((c, d))) => c <= a && b <= d,
        }
    }

    /// All splits `(lower, upper)` with `lower ⊕ upper = self`: the disjoint convex pairs
    /// whose union is `self`, the lower part sitting directly below the upper part.
    pub fn splits(&self) -> Vec<(LaneInterval, LaneInterval)> {
        match self.0 {
            None => vec![(LaneInterval::EMPTY, LaneInterval::EMPTY)],
            Some((lo, hi)) => {
                let mut out = vec![(LaneInterval::EMPTY, *self)];
                for cut in lo..=hi {
                    let lower = LaneInterval(Some((lo, cut)));
                    let upper = if cut == hi {
                        LaneInterval::EMPTY
                    } else {
                        LaneInterval(Some((cut + 1, hi)))
                    };
                    out.push((lower, upper));
                }
                out
            }
        }
    }

    /// Whether `(lower, upper)` is one of [`LaneInterval::splits`].
    pub fn is_split(lower: &LaneInterval, upper: &LaneInterval, whole: &LaneInterval) -> bool {
        match (lower.0, upper.0) {
            (None, None) => whole.is_empty(),
            (None, Some(_)) => upper == whole,
            (Some(_), None) => lower == whole,
            (Some((a, b)), Some((c, d))) => b + 1 == c && whole.0 == Some((a, d)),
        }
    }
}

impl Measure for LaneInterval {
    type Output = usize;
    fn measure(&self) -> usize {
        match self.0 {
            None => 0,
            Some((lo, hi)) => (hi - lo + 1) as usize,
        }
    }
}

impl fmt::Display for LaneInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => f.write_str("{}"),
            Some((lo, hi)) => write!(f, "[{lo}..{hi}]"),
        }
    }
}

/// The part of the road a car perceives: a lane interval, an extent, and its owner.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct View {
    pub lanes: LaneInterval,
    pub extent: Extent,
    pub owner: CarId,
}

impl View {
    pub fn new(lanes: LaneInterval, extent: Extent, owner: impl Into<CarId>) -> Self {
        View {
            lanes,
            extent,
            owner: owner.into(),
        }
    }

    /// `V^{L'}`: the same view on a sub-interval of its lanes.
    pub fn restrict_lanes(&self, lanes: LaneInterval) -> Result<View, ModelError> {
        if !lanes.is_subinterval_of(&self.lanes) {
            return Err(ModelError::NotASubinterval(format!("{lanes} of {}", self.lanes)));
        }
        Ok(View {
            lanes,
            ..self.clone()
        })
    }

    /// `V_{X'}`: the same view on a sub-interval of its extent.
    pub fn restrict_extent(&self, extent: Extent) -> Result<View, ModelError> {
        if !extent.is_subinterval_of(&self.extent) {
            return Err(ModelError::NotASubinterval(format!("{extent} of {}", self.extent)));
        }
        Ok(View {
            extent,
            ..self.clone()
        })
    }

    /// Horizontal chop at `s`: `(V_[r,s], V_[s,t])`.
    pub fn chop_h(&self, s: &Rational) -> Result<(View, View), ModelError> {
        if !self.extent.contains(s) {
            return Err(ModelError::ChopPointOutOfRange {
                point: rational::format(s),
                extent: self.extent.to_string(),
            });
        }
        let left = Extent {
            lo: self.extent.lo.clone(),
            hi: s.clone(),
        };
        let right = Extent {
            lo: s.clone(),
            hi: self.extent.hi.clone(),
        };
        Ok((
            View {
                extent: left,
                ..self.clone()
            },
            View {
                extent: right,
                ..self.clone()
            },
        ))
    }

    /// Every vertical chop `(lower, upper)`; `|L| + 1` of them.
    pub fn chop_v_all(&self) -> Vec<(View, View)> {
        self.lanes
            .splits()
            .into_iter()
            .map(|(lower, upper)| {
                (
                    View {
                        lanes: lower,
                        ..self.clone()
                    },
                    View {
                        lanes: upper,
                        ..self.clone()
                    },
                )
            })
            .collect()
    }

    /// `left ⊖ right = whole` for horizontal chops.
    pub fn is_hchop(left: &View, right: &View, whole: &View) -> bool {
        left.owner == whole.owner
            && right.owner == whole.owner
            && left.lanes == whole.lanes
            && right.lanes == whole.lanes
            && left.extent.lo == whole.extent.lo
            && right.extent.hi == whole.extent.hi
            && left.extent.hi == right.extent.lo
    }

    /// `lower ⊕ upper = whole` for vertical chops.
    pub fn is_vchop(lower: &View, upper: &View, whole: &View) -> bool {
        lower.owner == whole.owner
            && upper.owner == whole.owner
            && lower.extent == whole.extent
            && upper.extent == whole.extent
            && LaneInterval::is_split(&lower.lanes, &upper.lanes, &whole.lanes)
    }

    pub fn has_positive_length(&self) -> bool {
        !self.extent.measure().is_zero()
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.lanes, self.extent, self.owner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn sample_view() -> View {
        View::new(LaneInterval::new(1, 2).unwrap(), Extent::from_ints(12, 42).unwrap(), "E")
    }

    #[test]
    fn measures() {
        assert_eq!(Extent::from_ints(12, 42).unwrap().measure(), int(30));
        assert_eq!(LaneInterval::EMPTY.measure(), 0);
        assert_eq!(LaneInterval::new(1, 2).unwrap().measure(), 2);
    }

    #[test]
    fn restriction() {
        let v = sample_view();
        assert_eq!(v.restrict_lanes(v.lanes).unwrap(), v);
        let lower = v.restrict_lanes(LaneInterval::single(1)).unwrap();
        assert_eq!(lower.lanes, LaneInterval::single(1));
        assert_eq!(lower.extent, v.extent);
        let narrow = v.restrict_extent(Extent::from_ints(14, 27).unwrap()).unwrap();
        assert_eq!(narrow.extent, Extent::from_ints(14, 27).unwrap());
        assert_eq!(narrow.lanes, v.lanes);
        assert!(matches!(
            v.restrict_lanes(LaneInterval::new(2, 3).unwrap()),
            Err(ModelError::NotASubinterval(_))
        ));
        assert!(v.restrict_extent(Extent::from_ints(10, 20).unwrap()).is_err());
    }

    #[test]
    fn horizontal_chop() {
        let v = sample_view();
        let (a, b) = v.chop_h(&int(27)).unwrap();
        assert_eq!(a.extent, Extent::from_ints(12, 27).unwrap());
        assert_eq!(b.extent, Extent::from_ints(27, 42).unwrap());
        assert_eq!(a.extent.measure() + b.extent.measure(), v.extent.measure());
        let (p, _) = v.chop_h(&int(12)).unwrap();
        assert!(p.extent.measure().is_zero());
        assert!(matches!(v.chop_h(&int(11)), Err(ModelError::ChopPointOutOfRange { .. })));
        assert!(View::is_hchop(&a, &b, &v));
        assert!(!View::is_hchop(&b, &a, &v));
    }

    #[test]
    fn vertical_chops() {
        let empty = View::new(LaneInterval::EMPTY, Extent::from_ints(0, 1).unwrap(), "E");
        let splits = empty.chop_v_all();
        assert_eq!(splits.len(), 1);
        assert!(splits[0].0.lanes.is_empty() && splits[0].1.lanes.is_empty());

        let v = sample_view();
        let lanes: Vec<_> = v.chop_v_all().into_iter().map(|(l, u)| (l.lanes, u.lanes)).collect();
        assert_eq!(
            lanes,
            vec![
                (LaneInterval::EMPTY, LaneInterval::new(1, 2).unwrap()),
                (LaneInterval::single(1), LaneInterval::single(2)),
                (LaneInterval::new(1, 2).unwrap(), LaneInterval::EMPTY),
            ]
        );
        let wide = View::new(LaneInterval::new(0, 3).unwrap(), v.extent.clone(), "E");
        let all = wide.chop_v_all();
        assert_eq!(all.len(), 5);
        assert!(all.iter().all(|(l, u)| View::is_vchop(l, u, &wide)));
        // overlapping pair is never a split
        assert!(!LaneInterval::is_split(
            &LaneInterval::new(0, 1).unwrap(),
            &LaneInterval::new(1, 3).unwrap(),
            &LaneInterval::new(0, 3).unwrap()
        ));
    }

    #[test]
    fn lane_interval_from_set() {
        let set: BTreeSet<Lane> = [1, 2].into_iter().collect();
        assert_eq!(LaneInterval::from_set(&set), Some(LaneInterval::new(1, 2).unwrap()));
        let gap: BTreeSet<Lane> = [1, 3].into_iter().collect();
        assert_eq!(LaneInterval::from_set(&gap), None);
        assert_eq!(LaneInterval::from_set(&BTreeSet::new()), Some(LaneInterval::EMPTY));
    }
}

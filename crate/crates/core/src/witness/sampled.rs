//! Witnesses over infinite orders, checked on finite samples.
//!
//! A symbolic map sends sample elements to elements of the same infinite
//! order; clause (ii) is checked on every pair of sample elements whose
//! images also lie in the sample.

use std::collections::HashSet;
use std::fmt::Display;
use std::hash::Hash;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{checks, disagreement_set, scan, Exhibit, Report, WitnessKind};
use crate::error::{Error, Result};
use crate::relation::{Element, RelationSet, Sort};
use crate::structures::{iterated_discrete_sample, IdPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// ℤ, sampled as the window `[-W, W]`.
    Integers,
    /// ℤ×ℚ under the reverse lexicographic order.
    IteratedDiscrete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointMap {
    Identity,
    Negate,
    /// `n ↦ n + 1`.
    Shift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMap {
    Identity,
    /// Finite intervals fixed; `[(n,q),(m,r)]` with `q < r` goes to `[(n,2q-r),(m,r)]`.
    Doubling,
    /// Finite intervals fixed; `[(n,q),(m,r)]` with `q < r` goes to `[(n,(q+r)/2),(m,r)]`.
    Halving,
    /// `[a,b] ↦ [-a, b-2a]`: start negated, length kept.
    NegateKeepLength,
}

/// Carriers the symbolic maps act on.
pub trait Carrier: Ord + Copy + Hash + Display + Send + Sync {
    fn negate(self) -> Self;
    fn shift(self) -> Option<Self>;
    fn doubled(lo: Self, hi: Self) -> Option<(Self, Self)>;
    fn halved(lo: Self, hi: Self) -> Option<(Self, Self)>;
    fn negate_keep_length(lo: Self, hi: Self) -> Option<(Self, Self)>;
}

impl Carrier for i64 {
    fn negate(self) -> i64 {
        -self
    }
    fn shift(self) -> Option<i64> {
        Some(self + 1)
    }
    fn doubled(_: i64, _: i64) -> Option<(i64, i64)> {
        None
    }
    fn halved(_: i64, _: i64) -> Option<(i64, i64)> {
        None
    }
    fn negate_keep_length(lo: i64, hi: i64) -> Option<(i64, i64)> {
        Some((-lo, hi - 2 * lo))
    }
}

impl Carrier for IdPoint {
    fn negate(self) -> IdPoint {
        IdPoint::negate(self)
    }
    fn shift(self) -> Option<IdPoint> {
        Some(self.successor())
    }
    fn doubled(lo: IdPoint, hi: IdPoint) -> Option<(IdPoint, IdPoint)> {
        if lo.q == hi.q {
            return Some((lo, hi));
        }
        Some((IdPoint::new(lo.n, lo.q - (hi.q - lo.q)), hi))
    }
    fn halved(lo: IdPoint, hi: IdPoint) -> Option<(IdPoint, IdPoint)> {
        if lo.q == hi.q {
            return Some((lo, hi));
        }
        Some((IdPoint::new(lo.n, lo.q + (hi.q - lo.q) / Ratio::from_integer(2)), hi))
    }
    fn negate_keep_length(_: IdPoint, _: IdPoint) -> Option<(IdPoint, IdPoint)> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SymbolicMap {
    pub domain: Domain,
    /// `None` when the signature is interval-only.
    pub points: Option<PointMap>,
    pub intervals: IntervalMap,
    /// Conjugated by the order reversal `x ↦ -x`, giving the dual construction.
    pub mirrored: bool,
}

impl SymbolicMap {
    pub fn new(domain: Domain, points: Option<PointMap>, intervals: IntervalMap, mirrored: bool) -> Result<SymbolicMap> {
        let ok = match domain {
            Domain::Integers => {
                matches!(intervals, IntervalMap::Identity | IntervalMap::NegateKeepLength)
            }
            Domain::IteratedDiscrete => {
                matches!(intervals, IntervalMap::Identity | IntervalMap::Doubling | IntervalMap::Halving)
                    && points != Some(PointMap::Shift)
            }
        };
        if !ok {
            return Err(Error::Data(format!("maps {points:?}/{intervals:?} are not defined on {domain:?}")));
        }
        Ok(SymbolicMap { domain, points, intervals, mirrored })
    }

    pub fn mirrored(&self) -> SymbolicMap {
        SymbolicMap { mirrored: !self.mirrored, ..*self }
    }

    fn point<P: Carrier>(&self, p: P) -> Option<P> {
        let go = |p: P| match self.points? {
            PointMap::Identity => Some(p),
            PointMap::Negate => Some(p.negate()),
            PointMap::Shift => p.shift(),
        };
        if self.mirrored {
            go(p.negate()).map(Carrier::negate)
        } else {
            go(p)
        }
    }

    fn interval<P: Carrier>(&self, lo: P, hi: P) -> Option<(P, P)> {
        let go = |lo: P, hi: P| match self.intervals {
            IntervalMap::Identity => Some((lo, hi)),
            IntervalMap::Doubling => P::doubled(lo, hi),
            IntervalMap::Halving => P::halved(lo, hi),
            IntervalMap::NegateKeepLength => P::negate_keep_length(lo, hi),
        };
        if self.mirrored {
            go(hi.negate(), lo.negate()).map(|(a, b)| (b.negate(), a.negate()))
        } else {
            go(lo, hi)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleBounds {
    /// `B`: integer coordinates in `[-B, B]`.
    pub int_bound: i64,
    /// `Dmax`: rational denominators up to this.
    pub denom_bound: i64,
    /// `Nmax`: rational numerators in `[-Nmax, Nmax]`.
    pub numer_bound: i64,
    /// `W`: the ℤ window `[-W, W]`.
    pub window: i64,
}

impl Default for SampleBounds {
    fn default() -> SampleBounds {
        SampleBounds { int_bound: 2, denom_bound: 2, numer_bound: 4, window: 8 }
    }
}

fn show<P: Display>(e: &Element<P>) -> String {
    match e {
        Element::Point(p) => p.to_string(),
        Element::Interval(a, b) => format!("[{a},{b}]"),
    }
}

/// `(x, ζ(x))` for every sample element whose image stays in the sample,
/// and the number of sample elements considered.
pub(crate) fn sample_pairs<P: Carrier>(map: &SymbolicMap, sample: &[P]) -> (Vec<(Element<P>, Element<P>)>, usize) {
    let inside: HashSet<P> = sample.iter().copied().collect();
    let mut pairs = Vec::new();
    let mut seen = 0;
    if map.points.is_some() {
        for &p in sample {
            seen += 1;
            if let Some(q) = map.point(p).filter(|q| inside.contains(q)) {
                pairs.push((Element::Point(p), Element::Point(q)));
            }
        }
    }
    for (i, &lo) in sample.iter().enumerate() {
        for &hi in &sample[i + 1..] {
            seen += 1;
            if let Some((a, b)) = map.interval(lo, hi) {
                if a < b && inside.contains(&a) && inside.contains(&b) {
                    pairs.push((Element::Interval(lo, hi), Element::Interval(a, b)));
                }
            }
        }
    }
    (pairs, seen)
}

fn check_on<P: Carrier>(map: &SymbolicMap, sample: &[P], respects: RelationSet, breaks: RelationSet) -> Result<Report> {
    let (pairs, seen) = sample_pairs(map, sample);
    if pairs.iter().all(|(x, y)| x == y) {
        return Err(Error::Domain(format!(
            "inconclusive: no element of the {}-point sample moves and stays inside it",
            sample.len()
        )));
    }
    if map.points.is_none() {
        let stray = (respects | breaks).iter().find(|r| r.sorts() != (Sort::Interval, Sort::Interval));
        if let Some(r) = stray {
            return Err(Error::Data(format!("interval-only map cannot speak about {r}")));
        }
    }
    let first = scan(&pairs);
    let exhibit = |i: usize, j: usize, holds: bool| Exhibit {
        source: (show(&pairs[i].0), show(&pairs[j].0)),
        target: (show(&pairs[i].1), show(&pairs[j].1)),
        holds_in_source: holds,
    };
    Ok(Report {
        id: String::new(),
        kind: WitnessKind::InfiniteSampled,
        respects: checks(&first, respects, false, &exhibit),
        total: None,
        surjective: None,
        breaks: checks(&first, breaks, true, &exhibit),
        disagreements: disagreement_set(&first),
        pairs_checked: pairs.len() * pairs.len(),
        note: Some(format!(
            "{} of {seen} sample elements have in-sample images; totality and surjectivity are partial (proof-level)",
            pairs.len()
        )),
    })
}

/// Check clause (ii) and the claimed breaks of a symbolic map on a sample.
pub fn check_sampled(map: &SymbolicMap, respects: RelationSet, breaks: RelationSet, bounds: &SampleBounds) -> Result<Report> {
    match map.domain {
        Domain::Integers => {
            if bounds.window < 1 {
                return Err(Error::Domain("the ℤ window needs W ≥ 1".into()));
            }
            let sample: Vec<i64> = (-bounds.window..=bounds.window).collect();
            check_on(map, &sample, respects, breaks)
        }
        Domain::IteratedDiscrete => {
            let sample = iterated_discrete_sample(bounds.int_bound, bounds.denom_bound, bounds.numer_bound)?;
            check_on(map, &sample, respects, breaks)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::*;

    fn doubling() -> SymbolicMap {
        SymbolicMap::new(Domain::IteratedDiscrete, None, IntervalMap::Doubling, false).unwrap()
    }

    #[test]
    fn doubling_examples() {
        let m = doubling();
        let (a, b) = (IdPoint::int(0, 0), IdPoint::int(3, 0));
        assert_eq!(m.interval(a, b), Some((a, b)));
        let c = IdPoint::int(0, 1);
        assert_eq!(m.interval(a, c), Some((IdPoint::int(0, -1), c)));
    }

    #[test]
    fn doubling_breaks_meets() {
        let m = doubling();
        let (x, y) = ((IdPoint::int(0, 0), IdPoint::int(0, 1)), (IdPoint::int(0, 1), IdPoint::int(0, 2)));
        let (ex, ey) = (Element::Interval(x.0, x.1), Element::Interval(y.0, y.1));
        assert_eq!(relation_between(&ex, &ey), II34);
        let (fx, fy) = (m.interval(x.0, x.1).unwrap(), m.interval(y.0, y.1).unwrap());
        assert_ne!(relation_between(&Element::Interval(fx.0, fx.1), &Element::Interval(fy.0, fy.1)), II34);
    }

    #[test]
    fn halving_respects_finishes() {
        let m = SymbolicMap::new(Domain::IteratedDiscrete, None, IntervalMap::Halving, false).unwrap();
        let rep = check_sampled(&m, RelationSet::of(&[II03, EQ_I]), RelationSet::of(&[II04]), &SampleBounds::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.total, None);
    }

    #[test]
    fn mirroring_twice_is_identity() {
        let m = doubling();
        let mm = m.mirrored();
        let (a, b) = (IdPoint::int(1, 0), IdPoint::int(-1, 2));
        assert_eq!(mm.interval(a, b), Some((a, IdPoint::int(-1, 4))));
        assert_eq!(mm.mirrored(), m);
    }

    #[test]
    fn tiny_sample_is_inconclusive() {
        let b = SampleBounds { int_bound: 1, denom_bound: 1, numer_bound: 0, window: 8 };
        assert!(check_sampled(&doubling(), RelationSet::of(&[II03]), RelationSet::of(&[II34]), &b).is_err());
    }

    #[test]
    fn incompatible_maps_rejected() {
        assert!(SymbolicMap::new(Domain::Integers, None, IntervalMap::Doubling, false).is_err());
    }
}

//! The 26 binary relations between points and intervals of a linear order.
//!
//! A relation is named by where its right argument falls in the partition
//! induced by its left argument. An interval `[a,b]` cuts the order into five
//! regions: `0` (before `a`), `1` (at `a`), `2` (strictly inside), `3` (at `b`)
//! and `4` (after `b`). A point `c` cuts it into three: `0`, `2` (at `c`), `4`.
//! Interval arguments contribute two region indices, one per endpoint.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Point,
    Interval,
}

impl Sort {
    pub fn suffix(self) -> &'static str {
        match self {
            Sort::Point => "p",
            Sort::Interval => "i",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    PointPoint,
    IntervalPoint,
    PointInterval,
    IntervalInterval,
}

impl Kind {
    /// Sorts of the (left, right) arguments.
    pub fn sorts(self) -> (Sort, Sort) {
        match self {
            Kind::PointPoint => (Sort::Point, Sort::Point),
            Kind::IntervalPoint => (Sort::Interval, Sort::Point),
            Kind::PointInterval => (Sort::Point, Sort::Interval),
            Kind::IntervalInterval => (Sort::Interval, Sort::Interval),
        }
    }

    fn of(lhs: Sort, rhs: Sort) -> Kind {
        match (lhs, rhs) {
            (Sort::Point, Sort::Point) => Kind::PointPoint,
            (Sort::Interval, Sort::Point) => Kind::IntervalPoint,
            (Sort::Point, Sort::Interval) => Kind::PointInterval,
            (Sort::Interval, Sort::Interval) => Kind::IntervalInterval,
        }
    }
}

/// One of the 26 relations. For single-region kinds `hi == lo`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    kind: Kind,
    lo: u8,
    hi: u8,
}

const fn rel(kind: Kind, lo: u8, hi: u8) -> Relation {
    Relation { kind, lo, hi }
}

pub const GT: Relation = rel(Kind::PointPoint, 0, 0);
pub const EQ_P: Relation = rel(Kind::PointPoint, 2, 2);
pub const LT: Relation = rel(Kind::PointPoint, 4, 4);
pub const IP0: Relation = rel(Kind::IntervalPoint, 0, 0);
pub const IP1: Relation = rel(Kind::IntervalPoint, 1, 1);
pub const IP2: Relation = rel(Kind::IntervalPoint, 2, 2);
pub const IP3: Relation = rel(Kind::IntervalPoint, 3, 3);
pub const IP4: Relation = rel(Kind::IntervalPoint, 4, 4);
pub const PI00: Relation = rel(Kind::PointInterval, 0, 0);
pub const PI02: Relation = rel(Kind::PointInterval, 0, 2);
pub const PI04: Relation = rel(Kind::PointInterval, 0, 4);
pub const PI24: Relation = rel(Kind::PointInterval, 2, 4);
pub const PI44: Relation = rel(Kind::PointInterval, 4, 4);
pub const II00: Relation = rel(Kind::IntervalInterval, 0, 0);
pub const II01: Relation = rel(Kind::IntervalInterval, 0, 1);
pub const II02: Relation = rel(Kind::IntervalInterval, 0, 2);
pub const II03: Relation = rel(Kind::IntervalInterval, 0, 3);
pub const II04: Relation = rel(Kind::IntervalInterval, 0, 4);
pub const II12: Relation = rel(Kind::IntervalInterval, 1, 2);
pub const EQ_I: Relation = rel(Kind::IntervalInterval, 1, 3);
pub const II14: Relation = rel(Kind::IntervalInterval, 1, 4);
pub const II22: Relation = rel(Kind::IntervalInterval, 2, 2);
pub const II23: Relation = rel(Kind::IntervalInterval, 2, 3);
pub const II24: Relation = rel(Kind::IntervalInterval, 2, 4);
pub const II34: Relation = rel(Kind::IntervalInterval, 3, 4);
pub const II44: Relation = rel(Kind::IntervalInterval, 4, 4);

pub const ALL: [Relation; 26] = [
    GT, EQ_P, LT, IP0, IP1, IP2, IP3, IP4, PI00, PI02, PI04, PI24, PI44, II00, II01, II02, II03,
    II04, II12, EQ_I, II14, II22, II23, II24, II34, II44,
];

/// The 14 relations left after discarding inverses, in canonical bit order.
pub const RPLUS: [Relation; 14] = [
    EQ_P, EQ_I, LT, IP0, IP1, IP2, IP3, IP4, II34, II14, II03, II24, II04, II44,
];

/// Region of `p` in the partition induced by the interval `[a,b]`.
pub fn interval_region<P: Ord>(a: &P, b: &P, p: &P) -> u8 {
    use std::cmp::Ordering::*;
    match (p.cmp(a), p.cmp(b)) {
        (Less, _) => 0,
        (Equal, _) => 1,
        (Greater, Less) => 2,
        (Greater, Equal) => 3,
        (Greater, Greater) => 4,
    }
}

/// Region of `p` in the partition induced by the point `c`.
pub fn point_region<P: Ord>(c: &P, p: &P) -> u8 {
    use std::cmp::Ordering::*;
    match p.cmp(c) {
        Less => 0,
        Equal => 2,
        Greater => 4,
    }
}

/// Checked form of [`interval_region`].
pub fn region_of_point<P: Ord>(a: &P, b: &P, p: &P) -> Result<u8> {
    if a >= b {
        return Err(Error::Domain("interval endpoints must satisfy a < b".into()));
    }
    Ok(interval_region(a, b, p))
}

/// A point or an interval over some ordered carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element<P> {
    Point(P),
    Interval(P, P),
}

impl<P> Element<P> {
    pub fn sort(&self) -> Sort {
        match self {
            Element::Point(_) => Sort::Point,
            Element::Interval(..) => Sort::Interval,
        }
    }
}

/// The unique relation holding between `lhs` and `rhs`. Intervals are assumed
/// well formed (`a < b`).
pub fn relation_between<P: Ord>(lhs: &Element<P>, rhs: &Element<P>) -> Relation {
    match (lhs, rhs) {
        (Element::Point(c), Element::Point(d)) => {
            let k = point_region(c, d);
            rel(Kind::PointPoint, k, k)
        }
        (Element::Interval(a, b), Element::Point(c)) => {
            let k = interval_region(a, b, c);
            rel(Kind::IntervalPoint, k, k)
        }
        (Element::Point(c), Element::Interval(a, b)) => {
            rel(Kind::PointInterval, point_region(c, a), point_region(c, b))
        }
        (Element::Interval(a, b), Element::Interval(c, d)) => rel(
            Kind::IntervalInterval,
            interval_region(a, b, c),
            interval_region(a, b, d),
        ),
    }
}

impl Relation {
    pub fn kind(self) -> Kind {
        self.kind
    }

    pub fn sorts(self) -> (Sort, Sort) {
        self.kind.sorts()
    }

    /// Region indices; the second is present only for relations whose right
    /// argument is an interval.
    pub fn regions(self) -> (u8, Option<u8>) {
        match self.kind {
            Kind::PointPoint | Kind::IntervalPoint => (self.lo, None),
            _ => (self.lo, Some(self.hi)),
        }
    }

    pub fn holds<P: Ord>(self, lhs: &Element<P>, rhs: &Element<P>) -> Result<bool> {
        let kind = Kind::of(lhs.sort(), rhs.sort());
        if kind != self.kind {
            return Err(Error::Sort(format!(
                "{self} expects ({:?}, {:?}) arguments, got ({:?}, {:?})",
                self.sorts().0,
                self.sorts().1,
                lhs.sort(),
                rhs.sort()
            )));
        }
        Ok(relation_between(lhs, rhs) == self)
    }

    /// A concrete pair of elements over the integers standing in this relation.
    pub fn realize(self) -> (Element<i32>, Element<i32>) {
        // Witness values per region of [10,20]: (leftmost, rightmost).
        const IV: [(i32, i32); 5] = [(1, 5), (10, 10), (12, 15), (20, 20), (25, 30)];
        // Per region of the point 20.
        const PV: [(i32, i32); 5] = [(1, 5), (0, 0), (20, 20), (0, 0), (25, 30)];
        let (lo, hi) = (self.lo as usize, self.hi as usize);
        match self.kind {
            Kind::PointPoint => (Element::Point(20), Element::Point(PV[lo].0)),
            Kind::IntervalPoint => (Element::Interval(10, 20), Element::Point(IV[lo].0)),
            Kind::PointInterval => (
                Element::Point(20),
                Element::Interval(PV[lo].0, PV[hi].1),
            ),
            Kind::IntervalInterval => (
                Element::Interval(10, 20),
                Element::Interval(IV[lo].0, IV[hi].1),
            ),
        }
    }

    pub fn inverse(self) -> Relation {
        let (x, y) = self.realize();
        relation_between(&y, &x)
    }

    /// The relation `r'` with `F |= r(x,y)` iff `F^d |= r'(x^d,y^d)` on the
    /// order dual, where an interval keeps its endpoints but swaps their roles.
    pub fn dual(self) -> Relation {
        let (lo, hi) = (4 - self.hi, 4 - self.lo);
        match self.kind {
            Kind::PointPoint | Kind::IntervalPoint => rel(self.kind, 4 - self.lo, 4 - self.lo),
            Kind::PointInterval | Kind::IntervalInterval => rel(self.kind, lo, hi),
        }
    }

    /// Bit position in [`RPLUS`], if the relation is one of the canonical 14.
    pub fn canonical_index(self) -> Option<usize> {
        RPLUS.iter().position(|&r| r == self)
    }

    pub fn is_canonical(self) -> bool {
        self.canonical_index().is_some()
    }

    pub fn classify(self) -> Result<Symmetry> {
        if !self.is_canonical() {
            return Err(Error::Domain(format!("{self} is not one of the 14 canonical relations")));
        }
        let d = self.dual();
        // The equalities are fixed by the dual too, but being symmetric in
        // their arguments they are filed with the argument-swapping class.
        Ok(if d == self && self.inverse() != self {
            Symmetry::SelfSymmetric
        } else if d.is_canonical() {
            Symmetry::Reversible
        } else {
            Symmetry::Symmetric
        })
    }

    pub fn reverse(self) -> Result<Relation> {
        match self.classify()? {
            Symmetry::Reversible => Ok(self.dual()),
            _ => Err(Error::Domain(format!("{self} is not reversible"))),
        }
    }

    /// Image under the symmetric-set map: reverse if reversible, else itself.
    pub fn symmetric(self) -> Relation {
        match self.classify() {
            Ok(Symmetry::Reversible) => self.dual(),
            _ => self,
        }
    }

    pub fn token(self) -> String {
        self.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Reversible,
    SelfSymmetric,
    /// Symmetric but not self-symmetric: the dual swaps the arguments.
    Symmetric,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.lo) {
            (Kind::PointPoint, 0) => f.write_str(">"),
            (Kind::PointPoint, 2) => f.write_str("=p"),
            (Kind::PointPoint, _) => f.write_str("<"),
            (Kind::IntervalPoint, k) => write!(f, "ip{k}"),
            (Kind::PointInterval, k) => write!(f, "pi{k}{}", self.hi),
            (Kind::IntervalInterval, 1) if self.hi == 3 => f.write_str("=i"),
            (Kind::IntervalInterval, k) => write!(f, "ii{k}{}", self.hi),
        }
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Relation> {
        let t = s.trim();
        let found = match t {
            "pp0" => Some(GT),
            "pp2" => Some(EQ_P),
            "pp4" => Some(LT),
            "ii13" => Some(EQ_I),
            _ => ALL.iter().copied().find(|r| r.to_string() == t),
        };
        found.ok_or_else(|| Error::UnknownRelation(t.to_string()))
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A subset of the 14 canonical relations, stored as a bitmask in [`RPLUS`]
/// order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSet(u16);

impl RelationSet {
    pub const EMPTY: RelationSet = RelationSet(0);
    pub const FULL: RelationSet = RelationSet((1 << 14) - 1);

    pub fn from_bits(bits: u16) -> Result<RelationSet> {
        if bits & !Self::FULL.0 != 0 {
            return Err(Error::Domain(format!("bitmask {bits:#x} exceeds 14 relations")));
        }
        Ok(RelationSet(bits))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn try_from_relations<I: IntoIterator<Item = Relation>>(rels: I) -> Result<RelationSet> {
        let mut s = RelationSet::EMPTY;
        for r in rels {
            let i = r
                .canonical_index()
                .ok_or_else(|| Error::Domain(format!("{r} is not one of the 14 canonical relations")))?;
            s.0 |= 1 << i;
        }
        Ok(s)
    }

    /// Panics on a non-canonical relation; for literals in code and tests.
    pub fn of(rels: &[Relation]) -> RelationSet {
        Self::try_from_relations(rels.iter().copied()).expect("canonical relations")
    }

    pub fn singleton(r: Relation) -> RelationSet {
        Self::of(&[r])
    }

    pub fn contains(self, r: Relation) -> bool {
        r.canonical_index().is_some_and(|i| self.0 & (1 << i) != 0)
    }

    pub fn with(self, r: Relation) -> RelationSet {
        self | RelationSet::singleton(r)
    }

    pub fn without(self, r: Relation) -> RelationSet {
        RelationSet(self.0 & !RelationSet::singleton(r).0)
    }

    pub fn is_subset(self, other: RelationSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Relation> {
        RPLUS
            .into_iter()
            .enumerate()
            .filter(move |(i, _)| self.0 & (1 << i) != 0)
            .map(|(_, r)| r)
    }

    /// All subsets, in increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = RelationSet> {
        let full = self.0 as u32;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full { None } else { Some(((cur | !full) + 1) & full) };
            Some(RelationSet(cur as u16))
        })
    }

    /// Replace every reversible member by its reverse.
    pub fn symmetric(self) -> RelationSet {
        RelationSet::of(&self.iter().map(Relation::symmetric).collect::<Vec<_>>())
    }

    /// Ordering key: cardinality, then bitmask.
    pub fn sort_key(self) -> (usize, u16) {
        (self.len(), self.0)
    }

    pub fn tokens(self) -> Vec<String> {
        self.iter().map(|r| r.to_string()).collect()
    }

    /// Parse a comma-separated token list; `{}` and whitespace are ignored.
    pub fn parse_list(text: &str) -> Result<RelationSet> {
        let t = text.trim().trim_start_matches('{').trim_end_matches('}');
        let rels = t
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Relation>>>()?;
        Self::try_from_relations(rels)
    }
}

impl std::ops::BitOr for RelationSet {
    type Output = RelationSet;
    fn bitor(self, o: RelationSet) -> RelationSet {
        RelationSet(self.0 | o.0)
    }
}

impl std::ops::BitAnd for RelationSet {
    type Output = RelationSet;
    fn bitand(self, o: RelationSet) -> RelationSet {
        RelationSet(self.0 & o.0)
    }
}

impl std::ops::Sub for RelationSet {
    type Output = RelationSet;
    fn sub(self, o: RelationSet) -> RelationSet {
        RelationSet(self.0 & !o.0)
    }
}

impl fmt::Display for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.tokens().join(", "))
    }
}

impl FromStr for RelationSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<RelationSet> {
        RelationSet::parse_list(s)
    }
}

impl Serialize for RelationSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.tokens().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RelationSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<Relation>::deserialize(d)?;
        RelationSet::try_from_relations(v).map_err(serde::de::Error::custom)
    }
}

/// The canonical relation sets studied as closure universes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Universe {
    Rplus,
    Iplus,
    Mplus,
    Pplus,
}

impl Universe {
    pub fn set(self) -> RelationSet {
        match self {
            Universe::Rplus => RelationSet::FULL,
            Universe::Iplus => RelationSet::of(&[EQ_I, II34, II14, II03, II24, II04, II44]),
            Universe::Mplus => RelationSet::of(&[IP0, IP1, IP2, IP3, IP4]),
            Universe::Pplus => RelationSet::of(&[EQ_P, LT]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Universe::Rplus => "Rplus",
            Universe::Iplus => "Iplus",
            Universe::Mplus => "Mplus",
            Universe::Pplus => "Pplus",
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Universe {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Universe {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Universe, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for Universe {
    type Err = Error;
    fn from_str(s: &str) -> Result<Universe> {
        match s.to_ascii_lowercase().as_str() {
            "rplus" | "r+" => Ok(Universe::Rplus),
            "iplus" | "i+" => Ok(Universe::Iplus),
            "mplus" | "m+" => Ok(Universe::Mplus),
            "pplus" | "p+" => Ok(Universe::Pplus),
            _ => Err(Error::Domain(format!("unknown universe `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_round_trip() {
        for r in ALL {
            assert_eq!(r.to_string().parse::<Relation>().unwrap(), r);
        }
        assert_eq!("ii13".parse::<Relation>().unwrap(), EQ_I);
        assert_eq!("pp4".parse::<Relation>().unwrap(), LT);
        assert!("ii21".parse::<Relation>().is_err());
    }

    #[test]
    fn region_examples() {
        assert_eq!(region_of_point(&1, &3, &2).unwrap(), 2);
        assert_eq!(region_of_point(&1, &3, &1).unwrap(), 1);
        assert_eq!(region_of_point(&1, &3, &0).unwrap(), 0);
        assert!(region_of_point(&3, &1, &2).is_err());
    }

    #[test]
    fn holds_examples() {
        let iv = |a, b| Element::Interval(a, b);
        assert!(II34.holds(&iv(1, 2), &iv(2, 3)).unwrap());
        assert!(EQ_I.holds(&iv(1, 2), &iv(1, 2)).unwrap());
        assert!(II24.holds(&iv(1, 3), &iv(2, 4)).unwrap());
        assert!(II34.holds(&iv(1, 2), &Element::Point(2)).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(II22.inverse(), II04);
        assert_eq!(EQ_P.inverse(), EQ_P);
        assert_eq!(IP3.inverse(), PI02);
    }

    #[test]
    fn every_realization_is_faithful() {
        for r in ALL {
            let (x, y) = r.realize();
            assert_eq!(relation_between(&x, &y), r, "{r}");
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(II14.classify().unwrap(), Symmetry::Reversible);
        assert_eq!(IP2.classify().unwrap(), Symmetry::SelfSymmetric);
        assert_eq!(II34.classify().unwrap(), Symmetry::Symmetric);
        assert!(II22.classify().is_err());
        assert_eq!(IP0.reverse().unwrap(), IP4);
        assert!(LT.reverse().is_err());
    }

    #[test]
    fn symmetric_set_examples() {
        assert_eq!(RelationSet::of(&[IP1, II03]).symmetric(), RelationSet::of(&[IP3, II14]));
        assert_eq!(RelationSet::of(&[LT, EQ_I]).symmetric(), RelationSet::of(&[LT, EQ_I]));
    }

    #[test]
    fn subsets_enumerates_all() {
        let u = Universe::Mplus.set();
        let subs: Vec<_> = u.subsets().collect();
        assert_eq!(subs.len(), 32);
        assert!(subs.iter().all(|s| s.is_subset(u)));
        assert_eq!(RelationSet::EMPTY.subsets().count(), 1);
        assert_eq!(RelationSet::FULL.subsets().count(), 16384);
    }

    #[test]
    fn list_parsing() {
        let s = RelationSet::parse_list("ip3, ip1").unwrap();
        assert_eq!(s, RelationSet::of(&[IP1, IP3]));
        assert_eq!(s.to_string(), "{ip1, ip3}");
        assert!(RelationSet::parse_list("ii22").is_err());
        assert_eq!(RelationSet::parse_list("{}").unwrap(), RelationSet::EMPTY);
    }
}

//! Finite linear orders with their intervals, order duals, and finite samples
//! of the iterated discrete order on ℤ×ℚ.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::relation::{Element, Sort};

/// An interval of a finite order, as a pair of point positions with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Interval> {
        if lo >= hi {
            return Err(Error::Domain(format!("interval [{lo},{hi}] is not strict")));
        }
        Ok(Interval { lo, hi })
    }
}

/// An element of a finite structure, by position.
pub type Elem = Element<usize>;

/// Frame classes tracked by the workbench.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    Lin,
    Dis,
}

/// A finite linear order; points are ordered by their position in `labels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    labels: Vec<String>,
    intervals: Vec<Interval>,
}

impl Structure {
    pub fn from_labels<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Structure> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::Domain("point labels must be distinct".into()));
        }
        if labels.iter().any(|l| l.is_empty() || l.contains(['[', ']', ','])) {
            return Err(Error::Domain("point labels must be non-empty and free of `[],`".into()));
        }
        let n = labels.len();
        let intervals = (0..n)
            .flat_map(|lo| (lo + 1..n).map(move |hi| Interval { lo, hi }))
            .collect();
        Ok(Structure { labels, intervals })
    }

    /// The canonical `n`-point order, labelled `0..n-1`.
    pub fn linear_order(n: usize) -> Result<Structure> {
        if n == 0 {
            return Err(Error::Domain("a linear order needs at least one point".into()));
        }
        Structure::from_labels((0..n).map(|i| i.to_string()))
    }

    /// Same order with every label primed, as used for target structures.
    pub fn primed(&self) -> Structure {
        Structure::from_labels(self.labels.iter().map(|l| format!("{l}'"))).expect("primes keep labels distinct")
    }

    pub fn num_points(&self) -> usize {
        self.labels.len()
    }

    pub fn num_intervals(&self) -> usize {
        self.intervals.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Position of an interval in [`Structure::intervals`].
    pub fn interval_index(&self, iv: Interval) -> usize {
        let n = self.labels.len();
        iv.lo * (2 * n - iv.lo - 1) / 2 + (iv.hi - iv.lo - 1)
    }

    pub fn elements(&self, sort: Sort) -> Vec<Elem> {
        match sort {
            Sort::Point => (0..self.num_points()).map(Element::Point).collect(),
            Sort::Interval => self.intervals.iter().map(|iv| Element::Interval(iv.lo, iv.hi)).collect(),
        }
    }

    pub fn point(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Data(format!("no point labelled `{label}`")))
    }

    pub fn interval(&self, lo: &str, hi: &str) -> Result<Interval> {
        Interval::new(self.point(lo)?, self.point(hi)?)
    }

    /// Parse `a` as a point or `[a,b]` as an interval.
    pub fn parse_element(&self, text: &str) -> Result<Elem> {
        let t = text.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Data(format!("malformed interval `{t}`")))?;
            let iv = self.interval(a.trim(), b.trim())?;
            Ok(Element::Interval(iv.lo, iv.hi))
        } else {
            Ok(Element::Point(self.point(t)?))
        }
    }

    pub fn show(&self, e: &Elem) -> String {
        match e {
            Element::Point(p) => self.labels[*p].clone(),
            Element::Interval(a, b) => format!("[{},{}]", self.labels[*a], self.labels[*b]),
        }
    }

    /// The order dual: the same points listed in reverse.
    pub fn dual(&self) -> Structure {
        Structure::from_labels(self.labels.iter().rev().cloned()).expect("labels already distinct")
    }

    /// Position in the dual of the point at position `p`.
    pub fn dual_point(&self, p: usize) -> usize {
        self.labels.len() - 1 - p
    }

    /// The interval of the dual with the same endpoint set.
    pub fn dual_interval(&self, iv: Interval) -> Interval {
        Interval { lo: self.dual_point(iv.hi), hi: self.dual_point(iv.lo) }
    }

    pub fn dual_element(&self, e: &Elem) -> Elem {
        match *e {
            Element::Point(p) => Element::Point(self.dual_point(p)),
            Element::Interval(a, b) => {
                let d = self.dual_interval(Interval { lo: a, hi: b });
                Element::Interval(d.lo, d.hi)
            }
        }
    }

    /// Every non-extremal point has a direct predecessor and successor.
    /// Always true for finite orders; kept as an explicit check.
    pub fn is_discrete(&self) -> bool {
        let n = self.labels.len();
        (1..n.saturating_sub(1)).all(|p| {
            let pred = (0..p).max();
            let succ = (p + 1..n).min();
            pred == Some(p - 1) && succ == Some(p + 1)
        })
    }

    pub fn classes(&self) -> Vec<ClassTag> {
        let mut v = vec![ClassTag::Lin];
        if self.is_discrete() {
            v.push(ClassTag::Dis);
        }
        v
    }
}

#[derive(Serialize, Deserialize)]
struct StructureFile {
    points: Vec<String>,
}

impl Serialize for Structure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StructureFile { points: self.labels.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = StructureFile::deserialize(d)?;
        Structure::from_labels(f.points).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join("<"))
    }
}

/// A point `(n, q)` of ℤ×ℚ, ordered by `q` first and then by `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IdPoint {
    pub n: i64,
    pub q: Ratio<i64>,
}

impl IdPoint {
    pub fn new(n: i64, q: Ratio<i64>) -> IdPoint {
        IdPoint { n, q }
    }

    pub fn int(n: i64, q: i64) -> IdPoint {
        IdPoint { n, q: Ratio::from_integer(q) }
    }

    pub fn successor(self) -> IdPoint {
        IdPoint { n: self.n + 1, q: self.q }
    }

    pub fn predecessor(self) -> IdPoint {
        IdPoint { n: self.n - 1, q: self.q }
    }

    /// The order-reversing involution `(n,q) ↦ (-n,-q)`.
    pub fn negate(self) -> IdPoint {
        IdPoint { n: -self.n, q: -self.q }
    }
}

impl Ord for IdPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.q.cmp(&other.q).then(self.n.cmp(&other.n))
    }
}

impl PartialOrd for IdPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for IdPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.q)
    }
}

impl Serialize for IdPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.n, format!("{}/{}", self.q.numer(), self.q.denom())).serialize(s)
    }
}

impl<'de> Deserialize<'de> for IdPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (n, q): (i64, String) = Deserialize::deserialize(d)?;
        let q: Ratio<i64> = q.parse().map_err(|_| serde::de::Error::custom(format!("bad rational `{q}`")))?;
        Ok(IdPoint { n, q })
    }
}

/// All `(n, p/d)` with `|n| ≤ int_bound`, `1 ≤ d ≤ denom_bound`, `|p| ≤ numer_bound`,
/// sorted by the iterated discrete order.
pub fn iterated_discrete_sample(int_bound: i64, denom_bound: i64, numer_bound: i64) -> Result<Vec<IdPoint>> {
    if int_bound < 0 || denom_bound < 1 || numer_bound < 0 {
        return Err(Error::Domain("sample bounds must satisfy B ≥ 0, Dmax ≥ 1, Nmax ≥ 0".into()));
    }
    let qs: BTreeSet<Ratio<i64>> = (1..=denom_bound)
        .flat_map(|d| (-numer_bound..=numer_bound).map(move |p| Ratio::new(p, d)))
        .collect();
    let mut pts: Vec<IdPoint> = qs
        .into_iter()
        .flat_map(|q| (-int_bound..=int_bound).map(move |n| IdPoint { n, q }))
        .collect();
    pts.sort();
    Ok(pts)
}

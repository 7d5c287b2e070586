//! Surjective S-truth-preserving relations: checking them, the built-in
//! catalog of incompleteness constructions, and small-model search.

mod sampled;
mod search;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rulebase::Status;
use crate::relation::{relation_between, Element, Relation, RelationSet, Sort, Universe, RPLUS};
use crate::structures::{Elem, Structure};

pub use sampled::{check_sampled, Carrier, Domain, IntervalMap, PointMap, SampleBounds, SymbolicMap};
pub use search::{breakable, search_witness, SearchSpace};

const BUILTIN: &str = include_str!("../../data/witnesses.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    FiniteExact,
    InfiniteSampled,
}

/// A finite relation ζ between two finite orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteZeta {
    pub source: Structure,
    pub target: Structure,
    /// Pairs of the same sort, points and intervals mixed.
    pub pairs: Vec<(Elem, Elem)>,
    /// False when ζ_p is absent: the signature is interval-only and the
    /// point sort takes no part in the check.
    pub points: bool,
}

impl FiniteZeta {
    pub fn new(source: Structure, target: Structure, pairs: Vec<(Elem, Elem)>, points: bool) -> Result<FiniteZeta> {
        for (x, y) in &pairs {
            if x.sort() != y.sort() {
                return Err(Error::Sort(format!("ζ pairs {} with {}", source.show(x), target.show(y))));
            }
            if !points && x.sort() == Sort::Point {
                return Err(Error::Data("point pairs given for an interval-only ζ".into()));
            }
            if !in_structure(&source, x) || !in_structure(&target, y) {
                return Err(Error::Data("ζ refers to an element outside its structure".into()));
            }
        }
        let mut seen = BTreeSet::new();
        let pairs = pairs.into_iter().filter(|p| seen.insert(*p)).collect();
        Ok(FiniteZeta { source, target, pairs, points })
    }

    /// The identity relation of `s` onto its primed copy.
    pub fn identity(s: &Structure) -> FiniteZeta {
        let pairs = all_elements(s, true).into_iter().map(|e| (e, e)).collect();
        FiniteZeta { source: s.clone(), target: s.primed(), pairs, points: true }
    }

    /// The same relation between the order duals.
    pub fn dual(&self) -> FiniteZeta {
        let pairs = self
            .pairs
            .iter()
            .map(|(x, y)| (self.source.dual_element(x), self.target.dual_element(y)))
            .collect();
        FiniteZeta { source: self.source.dual(), target: self.target.dual(), pairs, points: self.points }
    }

    pub fn sorts(&self) -> Vec<Sort> {
        if self.points {
            vec![Sort::Point, Sort::Interval]
        } else {
            vec![Sort::Interval]
        }
    }

    pub fn show_pair(&self, i: usize) -> (String, String) {
        let (x, y) = &self.pairs[i];
        (self.source.show(x), self.target.show(y))
    }
}

fn in_structure(s: &Structure, e: &Elem) -> bool {
    match *e {
        Element::Point(p) => p < s.num_points(),
        Element::Interval(a, b) => a < b && b < s.num_points(),
    }
}

pub(crate) fn all_elements(s: &Structure, points: bool) -> Vec<Elem> {
    let mut v = Vec::new();
    if points {
        v.extend(s.elements(Sort::Point));
    }
    v.extend(s.elements(Sort::Interval));
    v
}

#[derive(Clone, Debug, PartialEq)]
pub enum Construction {
    Finite(FiniteZeta),
    Sampled(SymbolicMap),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Short id such as `R13`; generated duals carry a trailing `'`.
    pub id: String,
    pub universe: Universe,
    pub row: String,
    pub respects: RelationSet,
    pub breaks: RelationSet,
    pub construction: Construction,
    pub dual_of: Option<String>,
    /// `Refuted` marks a transcribed row kept to document that it does not check.
    pub status: Status,
}

impl Witness {
    pub fn kind(&self) -> WitnessKind {
        match self.construction {
            Construction::Finite(_) => WitnessKind::FiniteExact,
            Construction::Sampled(_) => WitnessKind::InfiniteSampled,
        }
    }

    pub fn provenance(&self) -> String {
        match &self.dual_of {
            Some(src) => format!("dual of {src}"),
            None => format!("{} incompleteness row {}", self.universe, self.row),
        }
    }

    /// Order-dual image: reversed structures, symmetric sets.
    pub fn dual(&self) -> Witness {
        let construction = match &self.construction {
            Construction::Finite(z) => Construction::Finite(z.dual()),
            Construction::Sampled(m) => Construction::Sampled(m.mirrored()),
        };
        Witness {
            id: format!("{}'", self.id),
            universe: self.universe,
            row: format!("{}'", self.row),
            respects: self.respects.symmetric(),
            breaks: self.breaks.symmetric(),
            construction,
            dual_of: Some(self.id.clone()),
            status: self.status,
        }
    }

    pub fn is_sound(&self) -> bool {
        self.status == Status::Sound
    }

    pub fn check(&self, bounds: &SampleBounds) -> Result<Report> {
        match &self.construction {
            Construction::Finite(z) => Ok(check_finite(z, self.respects, self.breaks).with_id(&self.id)),
            Construction::Sampled(m) => Ok(check_sampled(m, self.respects, self.breaks, bounds)?.with_id(&self.id)),
        }
    }
}

/// A pair of ζ-pairs on which a relation disagrees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exhibit {
    pub source: (String, String),
    pub target: (String, String),
    /// Whether the relation holds on the source side (it fails on the target side iff true).
    pub holds_in_source: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub relation: Relation,
    pub ok: bool,
    pub exhibit: Option<Exhibit>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub id: String,
    pub kind: WitnessKind,
    pub respects: Vec<RelationCheck>,
    /// `None` for sampled witnesses, where totality is a proof-level property.
    pub total: Option<bool>,
    pub surjective: Option<bool>,
    pub breaks: Vec<RelationCheck>,
    /// Canonical relations on which some pair of ζ-pairs disagrees.
    pub disagreements: RelationSet,
    pub pairs_checked: usize,
    pub note: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.respects.iter().all(|c| c.ok)
            && self.breaks.iter().all(|c| c.ok)
            && self.total != Some(false)
            && self.surjective != Some(false)
    }

    fn with_id(mut self, id: &str) -> Report {
        self.id = id.to_string();
        self
    }
}

/// For each canonical relation, the first pair of pair-indices on which it
/// disagrees across ζ. Relations are compared in both argument orders since
/// ζ-pairs are taken in every combination.
pub(crate) fn scan<P: Ord>(pairs: &[(Element<P>, Element<P>)]) -> [Option<(usize, usize, bool)>; 14] {
    let mut first: [Option<(usize, usize, bool)>; 14] = [None; 14];
    for (i, (x, x2)) in pairs.iter().enumerate() {
        for (j, (y, y2)) in pairs.iter().enumerate() {
            let a = relation_between(x, y);
            let b = relation_between(x2, y2);
            if a == b {
                continue;
            }
            for (r, holds) in [(a, true), (b, false)] {
                if let Some(k) = r.canonical_index() {
                    first[k].get_or_insert((i, j, holds));
                }
            }
        }
    }
    first
}

pub(crate) fn checks(
    first: &[Option<(usize, usize, bool)>; 14],
    rels: RelationSet,
    want_disagreement: bool,
    show: &dyn Fn(usize, usize, bool) -> Exhibit,
) -> Vec<RelationCheck> {
    rels.iter()
        .map(|r| {
            let hit = first[r.canonical_index().expect("sets hold canonical relations")];
            RelationCheck { relation: r, ok: hit.is_some() == want_disagreement, exhibit: hit.map(|(i, j, h)| show(i, j, h)) }
        })
        .collect()
}

fn disagreement_set(first: &[Option<(usize, usize, bool)>; 14]) -> RelationSet {
    RelationSet::of(&RPLUS.iter().zip(first).filter(|(_, h)| h.is_some()).map(|(r, _)| *r).collect::<Vec<_>>())
}

/// Check clauses (i)–(iii) and the claimed breaks on a finite ζ.
pub fn check_finite(z: &FiniteZeta, respects: RelationSet, breaks: RelationSet) -> Report {
    let first = scan(&z.pairs);
    let show = |i: usize, j: usize, holds: bool| {
        let (a, a2) = z.show_pair(i);
        let (b, b2) = z.show_pair(j);
        Exhibit { source: (a, b), target: (a2, b2), holds_in_source: holds }
    };
    let mut respect_checks = checks(&first, respects, false, &show);
    let mut break_checks = checks(&first, breaks, true, &show);
    let sorts = z.sorts();
    let left: BTreeSet<Elem> = z.pairs.iter().map(|p| p.0).collect();
    let right: BTreeSet<Elem> = z.pairs.iter().map(|p| p.1).collect();
    let covers = |s: &Structure, side: &BTreeSet<Elem>| {
        sorts.iter().all(|&so| s.elements(so).iter().all(|e| side.contains(e)))
    };
    let mut note = None;
    let stray = RelationSet::try_from_relations(
        (respects | breaks).iter().filter(|r| !z.points && r.sorts() != (Sort::Interval, Sort::Interval)),
    )
    .expect("subsets of canonical sets");
    if !stray.is_empty() {
        note = Some(format!("ζ_p is absent but {stray} involves points"));
        for c in respect_checks.iter_mut().chain(break_checks.iter_mut()) {
            if stray.contains(c.relation) {
                c.ok = false;
            }
        }
    }
    Report {
        id: String::new(),
        kind: WitnessKind::FiniteExact,
        respects: respect_checks,
        total: Some(covers(&z.source, &left)),
        surjective: Some(covers(&z.target, &right)),
        breaks: break_checks,
        disagreements: disagreement_set(&first),
        pairs_checked: z.pairs.len() * z.pairs.len(),
        note,
    }
}

// ---------------------------------------------------------------- JSON form

#[derive(Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Extend {
    /// Listed pairs together with the whole identity.
    Identity,
    /// Listed pairs, plus identity on the elements no listed pair mentions.
    IdentityOnRest,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum RawZeta<T> {
    Exact(Vec<(T, T)>),
    Extended {
        #[serde(default = "Vec::new")]
        pairs: Vec<(T, T)>,
        extend: Extend,
    },
}

#[derive(Deserialize, Serialize)]
struct RawStructure {
    points: Vec<String>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawWitness {
    universe: Universe,
    row: String,
    kind: WitnessKind,
    respects: RelationSet,
    breaks: RelationSet,
    #[serde(default)]
    source: Option<RawStructure>,
    #[serde(default)]
    target: Option<RawStructure>,
    #[serde(default)]
    zeta_p: Option<RawZeta<String>>,
    #[serde(default)]
    zeta_i: Option<RawZeta<(String, String)>>,
    #[serde(default)]
    domain: Option<Domain>,
    #[serde(default)]
    map: Option<RawMap>,
    #[serde(default)]
    status: Status,
}

#[derive(Deserialize, Serialize)]
struct RawMap {
    points: Option<PointMap>,
    intervals: IntervalMap,
}

/// Look a target label up as given, or with a prime added.
fn target_point(t: &Structure, label: &str) -> Result<usize> {
    t.point(label).or_else(|_| t.point(&format!("{label}'")))
}

fn build_side<T>(
    raw: RawZeta<T>,
    universe: &[Elem],
    resolve: &dyn Fn(&T, bool) -> Result<Elem>,
) -> Result<Vec<(Elem, Elem)>> {
    let (listed, extend) = match raw {
        RawZeta::Exact(p) => (p, None),
        RawZeta::Extended { pairs, extend } => (pairs, Some(extend)),
    };
    let mut out = Vec::new();
    for (a, b) in &listed {
        out.push((resolve(a, false)?, resolve(b, true)?));
    }
    match extend {
        None => {}
        Some(Extend::Identity) => out.extend(universe.iter().map(|e| (*e, *e))),
        Some(Extend::IdentityOnRest) => {
            let mentioned: BTreeSet<Elem> = out.iter().flat_map(|(a, b)| [*a, *b]).collect();
            out.extend(universe.iter().filter(|e| !mentioned.contains(e)).map(|e| (*e, *e)));
        }
    }
    Ok(out)
}

fn build_witness(raw: RawWitness) -> Result<Witness> {
    let prefix = match raw.universe {
        Universe::Iplus => "I",
        Universe::Mplus => "M",
        Universe::Rplus => "R",
        Universe::Pplus => "P",
    };
    let id = format!("{prefix}{}", raw.row);
    let u = raw.universe.set();
    if !(raw.respects | raw.breaks).is_subset(u) {
        return Err(Error::Data(format!("witness {id} mentions relations outside {}", raw.universe)));
    }
    if !(raw.respects & raw.breaks).is_empty() {
        return Err(Error::Data(format!("witness {id} both respects and breaks {}", raw.respects & raw.breaks)));
    }
    let construction = match raw.kind {
        WitnessKind::FiniteExact => {
            let src = raw.source.ok_or_else(|| Error::Data(format!("witness {id} has no source")))?;
            let source = Structure::from_labels(src.points)?;
            let target = match raw.target {
                Some(t) => Structure::from_labels(t.points)?,
                None => source.primed(),
            };
            let points = raw.zeta_p.is_some();
            let mut pairs = Vec::new();
            if let Some(zp) = raw.zeta_p {
                let resolve = |l: &String, tgt: bool| -> Result<Elem> {
                    Ok(Element::Point(if tgt { target_point(&target, l)? } else { source.point(l)? }))
                };
                pairs.extend(build_side(zp, &source.elements(Sort::Point), &resolve)?);
            }
            let zi = raw.zeta_i.ok_or_else(|| Error::Data(format!("witness {id} has no zeta_i")))?;
            let resolve = |(a, b): &(String, String), tgt: bool| -> Result<Elem> {
                let iv = if tgt {
                    crate::structures::Interval::new(target_point(&target, a)?, target_point(&target, b)?)?
                } else {
                    source.interval(a, b)?
                };
                Ok(Element::Interval(iv.lo, iv.hi))
            };
            pairs.extend(build_side(zi, &source.elements(Sort::Interval), &resolve)?);
            if source.num_points() != target.num_points() && pairs.iter().any(|(a, b)| a == b) {
                // Identity extension presumes equal domains.
                return Err(Error::Data(format!("witness {id} extends by identity across different domains")));
            }
            Construction::Finite(FiniteZeta::new(source, target, pairs, points)?)
        }
        WitnessKind::InfiniteSampled => {
            let domain = raw.domain.ok_or_else(|| Error::Data(format!("witness {id} has no domain")))?;
            let map = raw.map.ok_or_else(|| Error::Data(format!("witness {id} has no map")))?;
            Construction::Sampled(SymbolicMap::new(domain, map.points, map.intervals, false)?)
        }
    };
    Ok(Witness { id, universe: raw.universe, row: raw.row, respects: raw.respects, breaks: raw.breaks, construction, dual_of: None, status: raw.status })
}

/// Transcribed witnesses followed by the generated duals of those whose
/// respected or broken sets are not self-symmetric.
#[derive(Clone, Debug)]
pub struct WitnessCatalog {
    pub witnesses: Vec<Witness>,
}

impl WitnessCatalog {
    pub fn builtin() -> Result<WitnessCatalog> {
        WitnessCatalog::from_json(BUILTIN)
    }

    pub fn load(path: &Path) -> Result<WitnessCatalog> {
        WitnessCatalog::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn builtin_or(path: Option<&Path>) -> Result<WitnessCatalog> {
        match path {
            Some(p) => WitnessCatalog::load(p),
            None => WitnessCatalog::builtin(),
        }
    }

    pub fn from_json(text: &str) -> Result<WitnessCatalog> {
        let raw: Vec<RawWitness> = serde_json::from_str(text)?;
        let mut witnesses = raw.into_iter().map(build_witness).collect::<Result<Vec<_>>>()?;
        let duals: Vec<Witness> = witnesses
            .iter()
            .filter(|w| w.is_sound())
            .filter(|w| w.respects.symmetric() != w.respects || w.breaks.symmetric() != w.breaks)
            .map(Witness::dual)
            .collect();
        witnesses.extend(duals);
        Ok(WitnessCatalog { witnesses })
    }

    pub fn get(&self, id: &str) -> Option<&Witness> {
        self.witnesses.iter().find(|w| w.id == id)
    }

    /// Every `(S, r)` the sound part of the catalog proves incomplete.
    pub fn claims(&self) -> Vec<(RelationSet, Relation, &Witness)> {
        self.witnesses.iter().filter(|w| w.is_sound()).flat_map(|w| w.breaks.iter().map(move |r| (w.respects, r, w))).collect()
    }
}

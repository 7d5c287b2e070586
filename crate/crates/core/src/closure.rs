//! Definability closure over a rule database, and the subset enumerations
//! built on it: minimally complete and maximally incomplete sets.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::{Relation, RelationSet, Universe};
use crate::rulebase::{Catalog, Column};

/// Class of linear orders a question is asked over. The rule sets of the two
/// classes coincide, so the tag is carried but never changes the answer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    #[default]
    Lin,
    Dis,
}

impl FromStr for Class {
    type Err = Error;
    fn from_str(s: &str) -> Result<Class> {
        match s.to_ascii_lowercase().as_str() {
            "lin" => Ok(Class::Lin),
            "dis" => Ok(Class::Dis),
            _ => Err(Error::Data(format!("unknown class `{s}` (expected lin or dis)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DbRule {
    pub id: usize,
    pub label: String,
    pub premises: RelationSet,
    pub conclusion: Relation,
}

/// The rules closure fires, in id order.
#[derive(Clone, Debug, Default)]
pub struct RuleDb {
    rules: Vec<DbRule>,
}

impl RuleDb {
    pub fn from_catalog(c: &Catalog) -> RuleDb {
        RuleDb::from_rules(c.database().into_iter().map(|r| DbRule {
            id: r.id,
            label: r.label(),
            premises: r.premises,
            conclusion: r.conclusion,
        }))
    }

    pub fn builtin() -> Result<RuleDb> {
        Ok(RuleDb::from_catalog(&Catalog::builtin()?))
    }

    pub fn from_rules(rules: impl IntoIterator<Item = DbRule>) -> RuleDb {
        let mut rules: Vec<DbRule> = rules.into_iter().collect();
        rules.sort_by_key(|r| r.id);
        RuleDb { rules }
    }

    pub fn rules(&self) -> &[DbRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rules whose premises and conclusion all lie in `u`.
    pub fn restrict(&self, u: RelationSet) -> RuleDb {
        let rules = self.rules.iter().filter(|r| r.premises.with(r.conclusion).is_subset(u)).cloned().collect();
        RuleDb { rules }
    }

    pub fn close(&self, s: RelationSet) -> RelationSet {
        let mut s = s;
        loop {
            let before = s;
            for r in &self.rules {
                if r.premises.is_subset(s) {
                    s = s.with(r.conclusion);
                }
            }
            if s == before {
                return s;
            }
        }
    }

    /// Closure with, for each derived member, the first rule that produced it.
    pub fn closure(&self, input: RelationSet) -> ClosureResult {
        let mut s = input;
        let mut derivation = BTreeMap::new();
        let mut order = Vec::new();
        loop {
            let before = s;
            for r in &self.rules {
                if r.premises.is_subset(s) && !s.contains(r.conclusion) {
                    s = s.with(r.conclusion);
                    order.push(r.conclusion);
                    derivation.insert(
                        r.conclusion,
                        Step { rule: r.id, label: r.label.clone(), premises: r.premises, conclusion: r.conclusion },
                    );
                }
            }
            if s == before {
                break;
            }
        }
        ClosureResult { input, closed: s, derivation, order }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: usize,
    pub label: String,
    pub premises: RelationSet,
    pub conclusion: Relation,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ⊢ {}", self.label, self.premises, self.conclusion)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureResult {
    pub input: RelationSet,
    pub closed: RelationSet,
    pub derivation: BTreeMap<Relation, Step>,
    /// Derived relations in firing order.
    pub order: Vec<Relation>,
}

impl ClosureResult {
    /// The firing steps needed to derive `r`, in firing order. Empty when
    /// `r` was in the input, `None` when it is not in the closure.
    pub fn chain(&self, r: Relation) -> Option<Vec<Step>> {
        if !self.closed.contains(r) {
            return None;
        }
        let mut needed = RelationSet::EMPTY;
        let mut stack = vec![r];
        while let Some(q) = stack.pop() {
            if needed.contains(q) {
                continue;
            }
            if let Some(step) = self.derivation.get(&q) {
                needed = needed.with(q);
                stack.extend(step.premises.iter());
            }
        }
        Some(self.order.iter().filter(|q| needed.contains(**q)).map(|q| self.derivation[q].clone()).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Equal,
    LeftStrictlyStronger,
    RightStrictlyStronger,
    Incomparable,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Equal => "equal",
            Comparison::LeftStrictlyStronger => "left-strictly-stronger",
            Comparison::RightStrictlyStronger => "right-strictly-stronger",
            Comparison::Incomparable => "incomparable",
        })
    }
}

/// Closure restricted to one universe, with every subset's closure cached.
#[derive(Clone, Debug)]
pub struct Engine {
    universe: RelationSet,
    db: RuleDb,
    table: Vec<u16>,
}

impl Engine {
    pub fn new(db: &RuleDb, universe: Universe) -> Engine {
        Engine::over(db, universe.set())
    }

    pub fn builtin(universe: Universe) -> Result<Engine> {
        Ok(Engine::new(&RuleDb::builtin()?, universe))
    }

    pub fn over(db: &RuleDb, universe: RelationSet) -> Engine {
        let db = db.restrict(universe);
        let subsets: Vec<RelationSet> = universe.subsets().collect();
        let closed: Vec<RelationSet> = subsets.par_iter().map(|s| db.close(*s)).collect();
        let mut table = vec![0u16; 1 << 14];
        for (s, c) in subsets.iter().zip(closed) {
            table[s.bits() as usize] = c.bits();
        }
        Engine { universe, db, table }
    }

    pub fn universe(&self) -> RelationSet {
        self.universe
    }

    pub fn db(&self) -> &RuleDb {
        &self.db
    }

    fn inside(&self, s: RelationSet) -> Result<()> {
        if s.is_subset(self.universe) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{} lies outside the universe {}", s - self.universe, self.universe)))
        }
    }

    fn cl(&self, s: RelationSet) -> RelationSet {
        RelationSet::from_bits(self.table[s.bits() as usize]).expect("cached closures are valid sets")
    }

    pub fn close(&self, s: RelationSet) -> Result<RelationSet> {
        self.inside(s)?;
        Ok(self.cl(s))
    }

    pub fn closure(&self, s: RelationSet) -> Result<ClosureResult> {
        self.inside(s)?;
        Ok(self.db.closure(s))
    }

    /// The firing chain if `s` defines `r`, `None` otherwise.
    pub fn defines(&self, s: RelationSet, r: Relation) -> Result<Option<Vec<Step>>> {
        self.inside(s.with(r))?;
        Ok(self.db.closure(s).chain(r))
    }

    fn sorted(mut v: Vec<RelationSet>) -> Vec<RelationSet> {
        v.sort_by_key(|s| s.sort_key());
        v
    }

    fn minimal_with(&self, pred: impl Fn(RelationSet) -> bool + Sync) -> Vec<RelationSet> {
        let subsets: Vec<RelationSet> = self.universe.subsets().collect();
        let found = subsets
            .into_par_iter()
            .filter(|s| pred(*s) && s.iter().all(|x| !pred(s.without(x))))
            .collect();
        Engine::sorted(found)
    }

    fn maximal_without(&self, pred: impl Fn(RelationSet) -> bool + Sync) -> Vec<RelationSet> {
        let subsets: Vec<RelationSet> = self.universe.subsets().collect();
        let found = subsets
            .into_par_iter()
            .filter(|s| !pred(*s) && (self.universe - *s).iter().all(|x| pred(s.with(x))))
            .collect();
        Engine::sorted(found)
    }

    /// Minimal sets whose closure contains `r`.
    pub fn mcs(&self, r: Relation) -> Result<Vec<RelationSet>> {
        self.inside(RelationSet::singleton(r))?;
        Ok(self.minimal_with(|s| self.cl(s).contains(r)))
    }

    /// Maximal sets whose closure misses `r`.
    pub fn mis(&self, r: Relation) -> Result<Vec<RelationSet>> {
        self.inside(RelationSet::singleton(r))?;
        Ok(self.maximal_without(|s| self.cl(s).contains(r)))
    }

    pub fn min_complete_sets(&self) -> Vec<RelationSet> {
        let u = self.universe;
        self.minimal_with(|s| self.cl(s) == u)
    }

    pub fn max_incomplete_sets(&self) -> Vec<RelationSet> {
        let u = self.universe;
        self.maximal_without(|s| self.cl(s) == u)
    }

    pub fn compare(&self, s: RelationSet, t: RelationSet) -> Result<Comparison> {
        let (a, b) = (self.close(s)?, self.close(t)?);
        Ok(match (b.is_subset(a), a.is_subset(b)) {
            (true, true) => Comparison::Equal,
            (true, false) => Comparison::LeftStrictlyStronger,
            (false, true) => Comparison::RightStrictlyStronger,
            (false, false) => Comparison::Incomparable,
        })
    }

    /// Distinct closures over the universe, sorted canonically.
    pub fn closed_sets(&self) -> Vec<RelationSet> {
        let mut v: Vec<RelationSet> = self.universe.subsets().map(|s| self.cl(s)).collect();
        v.sort_by_key(|s| s.sort_key());
        v.dedup();
        v
    }

    pub fn harvest(&self) -> Harvest {
        Harvest { universe: self.universe, mcs: self.min_complete_sets(), mis: self.max_incomplete_sets() }
    }

    pub fn spectrum(&self, r: Relation) -> Result<Spectrum> {
        Ok(Spectrum { target: r, mcs: self.mcs(r)?, mis: self.mis(r)? })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Harvest {
    pub universe: RelationSet,
    pub mcs: Vec<RelationSet>,
    pub mis: Vec<RelationSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Spectrum {
    pub target: Relation,
    pub mcs: Vec<RelationSet>,
    pub mis: Vec<RelationSet>,
}

/// Whether each implied row of the catalog is derivable within its table's
/// universe, as `(rule id, derivable)`.
pub fn check_implied(catalog: &Catalog, db: &RuleDb) -> Vec<(usize, bool)> {
    let mut engines: BTreeMap<&'static str, Engine> = BTreeMap::new();
    catalog
        .rules
        .iter()
        .filter(|r| r.column == Column::Implied)
        .map(|r| {
            let u = r.universe();
            let e = engines.entry(u.name()).or_insert_with(|| Engine::new(db, u));
            (r.id, e.cl(r.premises).contains(r.conclusion))
        })
        .collect()
}

//! Shared helpers for the integration suites: expected sets transcribed from
//! the source tables, and a random formula generator.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

use ptint_core::formula::{defines_on, Model};
use ptint_core::relation::{relation_between, ALL};
use ptint_core::rulebase::{dual_definition, Column};
use ptint_core::structures::Elem;
use ptint_core::witness::{Construction, FiniteZeta};
use ptint_core::{Catalog, Formula, Relation, RelationSet, Sort, Structure, Universe, Var, WitnessCatalog};

#[derive(Debug, Deserialize)]
pub struct HarvestRow {
    pub mcs: Vec<RelationSet>,
    pub mis: Vec<RelationSet>,
}

/// One row of an incompleteness table: `set` is maximally r-incomplete for
/// every `r` in `bullets`.
#[derive(Debug, Deserialize)]
pub struct MisRow {
    pub part: String,
    pub set: RelationSet,
    pub bullets: RelationSet,
}

pub fn expected_harvest() -> BTreeMap<Universe, HarvestRow> {
    let raw: BTreeMap<String, HarvestRow> =
        serde_json::from_str(include_str!("../fixtures/harvest_expected.json")).unwrap();
    raw.into_iter().map(|(k, v)| (k.parse().unwrap(), v)).collect()
}

pub fn mis_rows() -> BTreeMap<Universe, Vec<MisRow>> {
    let raw: BTreeMap<String, Vec<MisRow>> = serde_json::from_str(include_str!("../fixtures/mis_rows.json")).unwrap();
    raw.into_iter().map(|(k, v)| (k.parse().unwrap(), v)).collect()
}

/// Random formulas over a signature with two free variables.
pub struct FormulaGen<'a, R: Rng> {
    pub rng: &'a mut R,
    pub sig: Vec<Relation>,
    pub sorts: Vec<Sort>,
    fresh: usize,
}

impl<'a, R: Rng> FormulaGen<'a, R> {
    pub fn new(rng: &'a mut R, sig: RelationSet) -> Self {
        let sig: Vec<Relation> = sig.iter().collect();
        let mut sorts: Vec<Sort> = sig.iter().flat_map(|r| [r.sorts().0, r.sorts().1]).collect();
        sorts.sort();
        sorts.dedup();
        FormulaGen { rng, sig, sorts, fresh: 0 }
    }

    /// Free variables `x`, `y` fitting some relation of the signature.
    pub fn free_vars(&mut self) -> (Var, Var) {
        let r = *self.sig.choose(self.rng).expect("nonempty signature");
        let (a, b) = r.sorts();
        (Var::new("x", a), Var::new("y", b))
    }

    fn atom(&mut self, scope: &[Var]) -> Formula {
        let fits: Vec<Relation> = self
            .sig
            .iter()
            .copied()
            .filter(|r| {
                let (a, b) = r.sorts();
                scope.iter().any(|v| v.sort == a) && scope.iter().any(|v| v.sort == b)
            })
            .collect();
        let r = *fits.choose(self.rng).expect("the free variables fit some relation");
        let (a, b) = r.sorts();
        let pick = |rng: &mut R, s: Sort| scope.iter().filter(|v| v.sort == s).collect::<Vec<_>>().choose(rng).map(|v| (*v).clone()).unwrap();
        let x = pick(self.rng, a);
        let y = pick(self.rng, b);
        Formula::atom(r, x, y).unwrap()
    }

    /// A formula of nesting depth at most `depth` over `scope`.
    pub fn formula(&mut self, depth: usize, scope: &[Var]) -> Formula {
        if depth == 0 {
            return self.atom(scope);
        }
        match self.rng.gen_range(0..6) {
            0 => self.atom(scope),
            1 => Formula::not(self.formula(depth - 1, scope)),
            2 => Formula::and(self.formula(depth - 1, scope), self.formula(depth - 1, scope)),
            3 => Formula::or(self.formula(depth - 1, scope), self.formula(depth - 1, scope)),
            k => {
                self.fresh += 1;
                let sort = *self.sorts.choose(self.rng).unwrap();
                let v = Var::new(format!("z{}", self.fresh), sort);
                let mut inner = scope.to_vec();
                inner.push(v.clone());
                let body = self.formula(depth - 1, &inner);
                if k == 4 {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
        }
    }
}

/// Pairs `((a, a'), (b, b'))` of ζ on which `f(x, y)` differs between the
/// two sides.
pub fn preservation_failures(z: &FiniteZeta, f: &Formula, x: &Var, y: &Var) -> Vec<(Elem, Elem)> {
    let (src, tgt) = (Model::new(&z.source), Model::new(&z.target));
    let vars = [x.clone(), y.clone()];
    let (cf, ct) = (src.compile(f, &vars).unwrap(), tgt.compile(f, &vars).unwrap());
    let mut bad = Vec::new();
    for (a, a2) in z.pairs.iter().filter(|p| p.0.sort() == x.sort) {
        for (b, b2) in z.pairs.iter().filter(|p| p.0.sort() == y.sort) {
            let lhs = cf.eval(&[src.index_of(a).unwrap(), src.index_of(b).unwrap()]);
            let rhs = ct.eval(&[tgt.index_of(a2).unwrap(), tgt.index_of(b2).unwrap()]);
            if lhs != rhs {
                bad.push((*a, *b));
            }
        }
    }
    bad
}

fn elements(s: &Structure) -> Vec<Elem> {
    let mut v = s.elements(Sort::Point);
    v.extend(s.elements(Sort::Interval));
    v
}

/// Violations of "exactly one canonical relation or inverse holds", the
/// inverse law and the dual law on orders of `1..=max_n` points.
pub fn relation_law_failures(max_n: usize) -> Vec<String> {
    let mut bad = Vec::new();
    for n in 1..=max_n {
        let s = Structure::linear_order(n).unwrap();
        let d = s.dual();
        let els = elements(&s);
        for x in &els {
            for y in &els {
                let holding: Vec<Relation> = ALL.iter().copied().filter(|r| r.holds(x, y).unwrap_or(false)).collect();
                if holding.len() != 1 {
                    bad.push(format!("n={n} {x:?} {y:?}: {} relations hold", holding.len()));
                    continue;
                }
                let r = holding[0];
                let (dx, dy) = (s.dual_element(x), s.dual_element(y));
                if relation_between(x, y) != r
                    || !r.inverse().holds(y, x).unwrap_or(false)
                    || r.inverse().inverse() != r
                    || relation_between(&dx, &dy) != r.dual()
                    || d.dual_element(&dx) != *x
                {
                    bad.push(format!("n={n} {x:?} {y:?}: inverse or dual law fails for {r}"));
                }
            }
        }
    }
    bad
}

/// Catalog formulas whose dual transform disagrees with the original on the
/// reversed order, or whose dual definition misses the symmetric relation,
/// on orders of `1..=max_n` points.
pub fn dual_transform_failures(catalog: &Catalog, max_n: usize) -> Vec<String> {
    let mut bad = Vec::new();
    for rule in catalog.rules.iter().filter(|r| r.formula.is_some() && r.column != Column::Trivial) {
        let f = rule.formula.as_ref().unwrap();
        let (x, y) = rule.vars();
        let g = f.dual_transform().unwrap();
        let sym = dual_definition(f, rule.conclusion, &x, &y).unwrap();
        let vars = [x.clone(), y.clone()];
        for n in 1..=max_n {
            let s = Structure::linear_order(n).unwrap();
            let d = s.dual();
            let (ms, md) = (Model::new(&s), Model::new(&d));
            let (cf, cg) = (ms.compile(f, &vars).unwrap(), md.compile(&g, &vars).unwrap());
            for a in s.elements(x.sort) {
                for b in s.elements(y.sort) {
                    let (da, db) = (s.dual_element(&a), s.dual_element(&b));
                    let lhs = cf.eval(&[ms.index_of(&a).unwrap(), ms.index_of(&b).unwrap()]);
                    let rhs = cg.eval(&[md.index_of(&da).unwrap(), md.index_of(&db).unwrap()]);
                    if lhs != rhs {
                        bad.push(format!("{} on n={n} at {a:?},{b:?}", rule.label()));
                    }
                }
            }
            if rule.is_sound() && !defines_on(&s, &sym, &x, &y, rule.conclusion.symmetric()).unwrap() {
                bad.push(format!("{} dual definition on n={n}", rule.label()));
            }
        }
    }
    bad
}

/// Random formulas over each sound finite witness's signature whose truth
/// ζ fails to preserve; `samples` formulas of depth at most 3 per witness.
pub fn preservation_violations<R: Rng>(rng: &mut R, catalog: &WitnessCatalog, samples: usize) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut tried = 0;
    for w in catalog.witnesses.iter().filter(|w| w.is_sound()) {
        let Construction::Finite(z) = &w.construction else { continue };
        for _ in 0..samples {
            let mut g = FormulaGen::new(rng, w.respects);
            let (x, y) = g.free_vars();
            let f = g.formula(3, &[x.clone(), y.clone()]);
            tried += 1;
            let fails = preservation_failures(z, &f, &x, &y);
            if !fails.is_empty() {
                bad.push(format!("{} fails to preserve {f} at {:?}", w.id, fails[0]));
            }
        }
    }
    (tried, bad)
}

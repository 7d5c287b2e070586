//! Two-sorted first-order formulas over the point-interval relations.
//!
//! Besides relation atoms, a formula may call a named binary *macro*
//! (`@name(x,y)`), an abbreviation for a formula with two free variables.
//! Macros keep long definitions readable and let the evaluator tabulate a
//! shared subformula once per structure.

mod eval;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::relation::{Relation, RelationSet, Sort, Symmetry};

pub use eval::{defines_on, eval, find_counterexample, Assignment, Compiled, Counterexample, Model};
pub use parse::{parse, parse_with};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Var {
        Var { name: name.into(), sort }
    }

    pub fn point(name: &str) -> Var {
        Var::new(name, Sort::Point)
    }

    pub fn interval(name: &str) -> Var {
        Var::new(name, Sort::Interval)
    }

    /// Parse `name_p` / `name_i`.
    pub fn parse(text: &str) -> Result<Var> {
        let bad = || Error::Parse { pos: 0, msg: format!("`{text}` is not a sorted variable") };
        let (name, suffix) = text.trim().rsplit_once('_').ok_or_else(bad)?;
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric()) {
            return Err(bad());
        }
        let sort = match suffix {
            "p" => Sort::Point,
            "i" => Sort::Interval,
            _ => return Err(bad()),
        };
        Ok(Var::new(name, sort))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.name, self.sort.suffix())
    }
}

/// A named formula with exactly two parameters.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Macro {
    pub name: String,
    pub params: (Var, Var),
    pub body: Formula,
}

impl Macro {
    pub fn new(name: impl Into<String>, params: (Var, Var), body: Formula) -> Result<Arc<Macro>> {
        let name = name.into();
        if params.0 == params.1 {
            return Err(Error::Data(format!("macro @{name} repeats its parameter")));
        }
        let allowed: BTreeSet<&Var> = [&params.0, &params.1].into_iter().collect();
        if let Some(v) = body.free_vars().iter().find(|v| !allowed.contains(v)) {
            return Err(Error::Data(format!("macro @{name} has unbound variable {v}")));
        }
        Ok(Arc::new(Macro { name, params, body }))
    }

    pub fn sorts(&self) -> (Sort, Sort) {
        (self.params.0.sort, self.params.1.sort)
    }

    /// The macro whose value on a structure is this macro's value on the
    /// order dual. Dualising twice gives back the original name and body.
    pub fn dual(&self) -> Result<Arc<Macro>> {
        let name = match self.name.strip_suffix('\'') {
            Some(base) => base.to_string(),
            None => format!("{}'", self.name),
        };
        Ok(Arc::new(Macro { name, params: self.params.clone(), body: self.body.dual_transform()? }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pred {
    Rel(Relation),
    Macro(Arc<Macro>),
}

impl Pred {
    pub fn sorts(&self) -> (Sort, Sort) {
        match self {
            Pred::Rel(r) => r.sorts(),
            Pred::Macro(m) => m.sorts(),
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Rel(r) => write!(f, "{r}"),
            Pred::Macro(m) => write!(f, "@{}", m.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Pred, Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

use Formula::*;

impl Formula {
    /// Sort-checked relation atom.
    pub fn atom(r: Relation, x: Var, y: Var) -> Result<Formula> {
        Formula::pred_atom(Pred::Rel(r), x, y)
    }

    pub fn pred_atom(p: Pred, x: Var, y: Var) -> Result<Formula> {
        let (s1, s2) = p.sorts();
        if x.sort != s1 || y.sort != s2 {
            return Err(Error::Sort(format!(
                "{p}({x},{y}) expects ({}, {}) arguments",
                s1.suffix(),
                s2.suffix()
            )));
        }
        Ok(Atom(p, x, y))
    }

    pub fn not(f: Formula) -> Formula {
        Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: Var, f: Formula) -> Formula {
        Exists(v, Box::new(f))
    }

    pub fn forall(v: Var, f: Formula) -> Formula {
        Forall(v, Box::new(f))
    }

    /// Relations occurring in the formula, including inside macros.
    pub fn relations(&self) -> BTreeSet<Relation> {
        let mut out = BTreeSet::new();
        self.visit_preds(&mut |p| {
            if let Pred::Rel(r) = p {
                out.insert(*r);
            }
        });
        out
    }

    /// The signature as a canonical relation set; fails on atoms outside the
    /// 14 canonical relations.
    pub fn signature(&self) -> Result<RelationSet> {
        RelationSet::try_from_relations(self.relations())
    }

    fn visit_preds(&self, f: &mut dyn FnMut(&Pred)) {
        match self {
            Atom(p, ..) => {
                f(p);
                if let Pred::Macro(m) = p {
                    m.body.visit_preds(f);
                }
            }
            Not(a) => a.visit_preds(f),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.visit_preds(f);
                b.visit_preds(f);
            }
            Exists(_, a) | Forall(_, a) => a.visit_preds(f),
        }
    }

    /// Names of macros used, transitively.
    pub fn macros(&self) -> BTreeMap<String, Arc<Macro>> {
        let mut out = BTreeMap::new();
        self.visit_preds(&mut |p| {
            if let Pred::Macro(m) = p {
                out.insert(m.name.clone(), m.clone());
            }
        });
        out
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a Var>, out: &mut BTreeSet<Var>) {
        match self {
            Atom(_, x, y) => {
                for v in [x, y] {
                    if !bound.contains(&v) {
                        out.insert(v.clone());
                    }
                }
            }
            Not(a) => a.collect_free(bound, out),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Exists(v, a) | Forall(v, a) => {
                bound.push(v);
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Nesting depth of quantifiers (macro bodies not expanded).
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Atom(..) => 0,
            Not(a) => a.quantifier_depth(),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            Exists(_, a) | Forall(_, a) => 1 + a.quantifier_depth(),
        }
    }

    /// Rewrite every atom with `f`; the result replaces the atom.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Pred, &Var, &Var) -> Result<Formula>) -> Result<Formula> {
        Ok(match self {
            Atom(p, x, y) => f(p, x, y)?,
            Not(a) => Formula::not(a.map_atoms(f)?),
            And(a, b) => Formula::and(a.map_atoms(f)?, b.map_atoms(f)?),
            Or(a, b) => Formula::or(a.map_atoms(f)?, b.map_atoms(f)?),
            Implies(a, b) => Formula::implies(a.map_atoms(f)?, b.map_atoms(f)?),
            Iff(a, b) => Formula::iff(a.map_atoms(f)?, b.map_atoms(f)?),
            Exists(v, a) => Formula::exists(v.clone(), a.map_atoms(f)?),
            Forall(v, a) => Formula::forall(v.clone(), a.map_atoms(f)?),
        })
    }

    /// The formula φ' with `F |= φ` iff `F^d |= φ'` on the order dual:
    /// reversible atoms are replaced by their reverse, argument-swapping
    /// symmetric atoms get their arguments swapped, self-symmetric atoms stay.
    pub fn dual_transform(&self) -> Result<Formula> {
        self.map_atoms(&mut |p, x, y| match p {
            Pred::Rel(r) => match r.classify()? {
                Symmetry::Reversible => Ok(Atom(Pred::Rel(r.reverse()?), x.clone(), y.clone())),
                Symmetry::SelfSymmetric => Ok(Atom(p.clone(), x.clone(), y.clone())),
                Symmetry::Symmetric => Ok(Atom(p.clone(), y.clone(), x.clone())),
            },
            Pred::Macro(m) => Ok(Atom(Pred::Macro(m.dual()?), x.clone(), y.clone())),
        })
    }

    /// Replace atoms of relation `r` by calls to `m` with the same arguments.
    pub fn substitute(&self, r: Relation, m: &Arc<Macro>) -> Result<Formula> {
        if m.sorts() != r.sorts() {
            return Err(Error::Sort(format!("macro @{} cannot stand for {r}", m.name)));
        }
        self.map_atoms(&mut |p, x, y| {
            Ok(match p {
                Pred::Rel(q) if *q == r => Atom(Pred::Macro(m.clone()), x.clone(), y.clone()),
                _ => Atom(p.clone(), x.clone(), y.clone()),
            })
        })
    }

    fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Atom(_, x, y) => {
                out.insert(x.name.clone());
                out.insert(y.name.clone());
            }
            Not(a) => a.all_names(out),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Exists(v, a) | Forall(v, a) => {
                out.insert(v.name.clone());
                a.all_names(out);
            }
        }
    }

    /// Rename free occurrences of variables according to `map`, renaming
    /// binders where they would capture a substituted variable.
    pub fn rename_free(&self, map: &BTreeMap<Var, Var>) -> Formula {
        fn go(f: &Formula, map: &BTreeMap<Var, Var>, used: &mut BTreeSet<String>) -> Formula {
            let sub = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
            match f {
                Atom(p, x, y) => Atom(p.clone(), sub(x), sub(y)),
                Not(a) => Formula::not(go(a, map, used)),
                And(a, b) => Formula::and(go(a, map, used), go(b, map, used)),
                Or(a, b) => Formula::or(go(a, map, used), go(b, map, used)),
                Implies(a, b) => Formula::implies(go(a, map, used), go(b, map, used)),
                Iff(a, b) => Formula::iff(go(a, map, used), go(b, map, used)),
                Exists(v, a) | Forall(v, a) => {
                    let mut inner = map.clone();
                    inner.remove(v);
                    let mut binder = v.clone();
                    if inner.values().any(|w| w == v) {
                        let fresh = (0..)
                            .map(|i| format!("{}{i}", v.name))
                            .find(|n| !used.contains(n))
                            .expect("unbounded supply of names");
                        used.insert(fresh.clone());
                        binder = Var::new(fresh, v.sort);
                        inner.insert(v.clone(), binder.clone());
                    }
                    let body = go(a, &inner, used);
                    if matches!(f, Exists(..)) {
                        Formula::exists(binder, body)
                    } else {
                        Formula::forall(binder, body)
                    }
                }
            }
        }
        let mut used = BTreeSet::new();
        self.all_names(&mut used);
        used.extend(map.values().map(|v| v.name.clone()));
        go(self, map, &mut used)
    }

    /// Swap two free variables.
    pub fn swap_free(&self, a: &Var, b: &Var) -> Formula {
        let map = BTreeMap::from([(a.clone(), b.clone()), (b.clone(), a.clone())]);
        self.rename_free(&map)
    }

    fn precedence(&self) -> u8 {
        match self {
            Exists(..) | Forall(..) => 0,
            Iff(..) => 1,
            Implies(..) => 2,
            Or(..) => 3,
            And(..) => 4,
            Not(..) | Atom(..) => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        let paren = prec < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Atom(p, x, y) => write!(f, "{p}({x},{y})")?,
            Not(a) => {
                f.write_str("~")?;
                a.write(f, 5)?;
            }
            And(a, b) => self.write_binary(f, a, " & ", b, 4, 5)?,
            Or(a, b) => self.write_binary(f, a, " | ", b, 3, 4)?,
            Implies(a, b) => self.write_binary(f, a, " -> ", b, 3, 2)?,
            Iff(a, b) => self.write_binary(f, a, " <-> ", b, 1, 2)?,
            Exists(v, a) | Forall(v, a) => {
                let q = if matches!(self, Exists(..)) { "E" } else { "A" };
                write!(f, "{q} {v} ")?;
                // Binary bodies are bracketed for legibility.
                let body_min = if (1..5).contains(&a.precedence()) { 6 } else { 0 };
                a.write(f, body_min)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }

    fn write_binary(
        &self,
        f: &mut fmt::Formatter<'_>,
        a: &Formula,
        op: &str,
        b: &Formula,
        lmin: u8,
        rmin: u8,
    ) -> fmt::Result {
        a.write(f, lmin)?;
        f.write_str(op)?;
        b.write(f, rmin)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

/// Named macros available to the parser.
#[derive(Clone, Debug, Default)]
pub struct MacroEnv {
    macros: BTreeMap<String, Arc<Macro>>,
}

impl MacroEnv {
    pub fn new() -> MacroEnv {
        MacroEnv::default()
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Macro>> {
        self.macros.get(name)
    }

    pub fn insert(&mut self, m: Arc<Macro>) -> Result<()> {
        if self.macros.contains_key(&m.name) {
            return Err(Error::Data(format!("macro @{} defined twice", m.name)));
        }
        self.macros.insert(m.name.clone(), m);
        Ok(())
    }

    /// Parse and register `@name(params) := body`.
    pub fn define(&mut self, name: &str, params: (&str, &str), body: &str) -> Result<Arc<Macro>> {
        let params = (Var::parse(params.0)?, Var::parse(params.1)?);
        let body = parse_with(body, self)?;
        let m = Macro::new(name, params, body)?;
        self.insert(m.clone())?;
        Ok(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Macro>> {
        self.macros.values()
    }

    pub fn len(&self) -> usize {
        self.macros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macros.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::*;

    #[test]
    fn dual_examples() {
        let x = Var::interval("x");
        let y = Var::point("y");
        let f = Formula::atom(IP0, x.clone(), y.clone()).unwrap();
        assert_eq!(f.dual_transform().unwrap().to_string(), "ip4(x_i,y_p)");
        let g = parse("ii34(x_i,y_i)").unwrap();
        assert_eq!(g.dual_transform().unwrap().to_string(), "ii34(y_i,x_i)");
        let h = parse("ip2(x_i,y_p)").unwrap();
        assert_eq!(h.dual_transform().unwrap(), h);
        assert!(parse("ii22(x_i,y_i)").unwrap().dual_transform().is_err());
    }

    #[test]
    fn dual_is_involutive_with_macros() {
        let mut env = MacroEnv::new();
        env.define("m", ("x_i", "y_i"), "E z_i (ii14(x_i,z_i) & ii34(z_i,y_i))").unwrap();
        let f = parse_with("@m(a_i,b_i) & ip1(a_i,c_p)", &env).unwrap();
        let d = f.dual_transform().unwrap();
        assert!(d.to_string().starts_with("@m'(a_i,b_i)"));
        assert_eq!(d.dual_transform().unwrap(), f);
    }

    #[test]
    fn signature_and_free_vars() {
        let f = parse("E z_i (ii34(x_i,z_i) & ii34(z_i,y_i))").unwrap();
        assert_eq!(f.signature().unwrap(), RelationSet::of(&[II34]));
        let fv: Vec<String> = f.free_vars().iter().map(|v| v.to_string()).collect();
        assert_eq!(fv, ["x_i", "y_i"]);
        assert_eq!(f.quantifier_depth(), 1);
    }

    #[test]
    fn substitution_reaches_atoms() {
        let mut env = MacroEnv::new();
        let m = env.define("lt2", ("x_p", "y_p"), "~(=p(x_p,y_p)) & ~>(x_p,y_p)").unwrap();
        let f = parse("A z_p <(x_p,z_p)").unwrap().substitute(LT, &m).unwrap();
        assert_eq!(f.to_string(), "A z_p @lt2(x_p,z_p)");
        assert!(f.signature().is_err(), "> is not canonical");
    }

    #[test]
    fn swap_respects_binding() {
        let f = parse("ii34(x_i,y_i) & (E x_i ii34(x_i,y_i))").unwrap();
        let g = f.swap_free(&Var::interval("x"), &Var::interval("y"));
        assert_eq!(g.to_string(), "ii34(y_i,x_i) & (E x0_i ii34(x0_i,x_i))");
    }
}

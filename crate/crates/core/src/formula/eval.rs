//! Exhaustive model checking over finite structures.
//!
//! Formulas are compiled against a [`Model`]: variables become slots in an
//! environment vector, relation atoms become lookups in precomputed truth
//! tables, and macros are tabulated once per model. Compilation also pushes
//! conjuncts (under `E`) and disjuncts (under `A`) that do not mention the
//! bound variable out of the quantifier, which is sound on empty domains too.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::sync::Arc;

use super::{Formula, Macro, Pred, Var};
use crate::error::{Error, Result};
use crate::relation::{relation_between, Element, Relation, Sort};
use crate::structures::{Elem, Structure};

/// Truth values of a binary predicate, indexed by element positions.
#[derive(Debug)]
struct Table {
    cols: usize,
    bits: Vec<bool>,
}

impl Table {
    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.cols + b]
    }
}

/// A finite structure prepared for evaluation.
pub struct Model<'s> {
    structure: &'s Structure,
    elements: [Vec<Elem>; 2],
    relations: RefCell<HashMap<Relation, Rc<Table>>>,
    macros: RefCell<HashMap<String, Vec<(Arc<Macro>, Rc<Table>)>>>,
}

fn sort_slot(s: Sort) -> usize {
    match s {
        Sort::Point => 0,
        Sort::Interval => 1,
    }
}

impl<'s> Model<'s> {
    pub fn new(structure: &'s Structure) -> Model<'s> {
        Model {
            structure,
            elements: [structure.elements(Sort::Point), structure.elements(Sort::Interval)],
            relations: RefCell::new(HashMap::new()),
            macros: RefCell::new(HashMap::new()),
        }
    }

    pub fn structure(&self) -> &Structure {
        self.structure
    }

    pub fn domain(&self, s: Sort) -> &[Elem] {
        &self.elements[sort_slot(s)]
    }

    /// Position of an element within its sort's domain.
    pub fn index_of(&self, e: &Elem) -> Result<usize> {
        let s = self.structure;
        match *e {
            Element::Point(p) if p < s.num_points() => Ok(p),
            Element::Interval(a, b) if a < b && b < s.num_points() => {
                Ok(s.interval_index(crate::structures::Interval { lo: a, hi: b }))
            }
            _ => Err(Error::Eval(format!("element {e:?} is not in the structure"))),
        }
    }

    fn relation_table(&self, r: Relation) -> Rc<Table> {
        if let Some(t) = self.relations.borrow().get(&r) {
            return t.clone();
        }
        let (s1, s2) = r.sorts();
        let (d1, d2) = (self.domain(s1), self.domain(s2));
        let bits = d1
            .iter()
            .flat_map(|a| d2.iter().map(move |b| relation_between(a, b) == r))
            .collect();
        let t = Rc::new(Table { cols: d2.len(), bits });
        self.relations.borrow_mut().insert(r, t.clone());
        t
    }

    fn macro_table(&self, m: &Arc<Macro>) -> Result<Rc<Table>> {
        // Dualising builds fresh `Arc`s, so match on content rather than pointer.
        if let Some(entries) = self.macros.borrow().get(&m.name) {
            if let Some((_, t)) = entries.iter().find(|(k, _)| Arc::ptr_eq(k, m) || **k == **m) {
                return Ok(t.clone());
            }
        }
        let (s1, s2) = m.sorts();
        let c = self.compile(&m.body, &[m.params.0.clone(), m.params.1.clone()])?;
        let (n1, n2) = (self.domain(s1).len(), self.domain(s2).len());
        let mut bits = Vec::with_capacity(n1 * n2);
        for a in 0..n1 {
            for b in 0..n2 {
                bits.push(c.eval(&[a, b]));
            }
        }
        let t = Rc::new(Table { cols: n2, bits });
        self.macros.borrow_mut().entry(m.name.clone()).or_default().push((m.clone(), t.clone()));
        Ok(t)
    }

    /// Compile `f` with the given free variables bound, in order, to the
    /// first argument slots of [`Compiled::eval`].
    pub fn compile(&self, f: &Formula, free: &[Var]) -> Result<Compiled> {
        let fv = f.free_vars();
        if let Some(v) = fv.iter().find(|v| !free.contains(v)) {
            return Err(Error::Eval(format!("free variable {v} is not assigned")));
        }
        let mut scope: Vec<(Var, usize)> = free.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut next = free.len();
        let root = self.node(f, &mut scope, &mut next)?;
        Ok(Compiled { root, slots: next, arity: free.len() })
    }

    fn node(&self, f: &Formula, scope: &mut Vec<(Var, usize)>, next: &mut usize) -> Result<Node> {
        let lookup = |v: &Var, scope: &Vec<(Var, usize)>| {
            scope
                .iter()
                .rev()
                .find(|(w, _)| w == v)
                .map(|(_, s)| *s)
                .ok_or_else(|| Error::Eval(format!("free variable {v} is not assigned")))
        };
        Ok(match f {
            Formula::Atom(p, x, y) => {
                let table = match p {
                    Pred::Rel(r) => self.relation_table(*r),
                    Pred::Macro(m) => self.macro_table(m)?,
                };
                Node::Atom { table, a: lookup(x, scope)?, b: lookup(y, scope)? }
            }
            Formula::Not(a) => Node::Not(Box::new(self.node(a, scope, next)?)),
            Formula::And(..) => {
                let mut parts = Vec::new();
                flatten(f, &mut parts, |g| match g {
                    Formula::And(a, b) => Some((a, b)),
                    _ => None,
                });
                Node::And(parts.into_iter().map(|g| self.node(g, scope, next)).collect::<Result<_>>()?)
            }
            Formula::Or(..) => {
                let mut parts = Vec::new();
                flatten(f, &mut parts, |g| match g {
                    Formula::Or(a, b) => Some((a, b)),
                    _ => None,
                });
                Node::Or(parts.into_iter().map(|g| self.node(g, scope, next)).collect::<Result<_>>()?)
            }
            Formula::Implies(a, b) => Node::Or(vec![
                Node::Not(Box::new(self.node(a, scope, next)?)),
                self.node(b, scope, next)?,
            ]),
            Formula::Iff(a, b) => Node::Iff(Box::new(self.node(a, scope, next)?), Box::new(self.node(b, scope, next)?)),
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                let slot = *next;
                *next += 1;
                scope.push((v.clone(), slot));
                let body = self.node(a, scope, next);
                scope.pop();
                let size = self.domain(v.sort).len();
                let exists = matches!(f, Formula::Exists(..));
                miniscope(exists, slot, size, body?)
            }
        })
    }
}

fn flatten<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>, split: fn(&'f Formula) -> Option<(&'f Box<Formula>, &'f Box<Formula>)>) {
    match split(f) {
        Some((a, b)) => {
            flatten(a, out, split);
            flatten(b, out, split);
        }
        None => out.push(f),
    }
}

/// Build `E slot. body` (or `A`), hoisting parts of a conjunctive (resp.
/// disjunctive) body that do not mention the bound slot.
fn miniscope(exists: bool, slot: usize, size: usize, body: Node) -> Node {
    let quant = |body: Node| {
        let body = Box::new(body);
        if exists {
            Node::Exists { slot, size, body }
        } else {
            Node::Forall { slot, size, body }
        }
    };
    let (parts, rebuild): (Vec<Node>, fn(Vec<Node>) -> Node) = match (exists, body) {
        (true, Node::And(parts)) => (parts, Node::And),
        (false, Node::Or(parts)) => (parts, Node::Or),
        (_, body) => return quant(body),
    };
    let (dep, indep): (Vec<Node>, Vec<Node>) = parts.into_iter().partition(|n| n.mentions(slot));
    if indep.is_empty() {
        return quant(rebuild(dep));
    }
    let inner = match dep.len() {
        0 => return rebuild_with_empty(exists, size, indep, rebuild),
        1 => dep.into_iter().next().unwrap(),
        _ => rebuild(dep),
    };
    let mut out: Vec<Node> = indep;
    out.push(quant(inner));
    rebuild(out)
}

/// `E v (A & B)` with nothing depending on `v`: true iff the domain is
/// non-empty and `A & B`; dually for `A`.
fn rebuild_with_empty(exists: bool, size: usize, parts: Vec<Node>, rebuild: fn(Vec<Node>) -> Node) -> Node {
    if size == 0 {
        return Node::Const(!exists);
    }
    rebuild(parts)
}

#[derive(Debug)]
enum Node {
    Const(bool),
    Atom { table: Rc<Table>, a: usize, b: usize },
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Iff(Box<Node>, Box<Node>),
    Exists { slot: usize, size: usize, body: Box<Node> },
    Forall { slot: usize, size: usize, body: Box<Node> },
}

impl Node {
    fn mentions(&self, slot: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Atom { a, b, .. } => *a == slot || *b == slot,
            Node::Not(n) => n.mentions(slot),
            Node::And(v) | Node::Or(v) => v.iter().any(|n| n.mentions(slot)),
            Node::Iff(a, b) => a.mentions(slot) || b.mentions(slot),
            Node::Exists { body, .. } | Node::Forall { body, .. } => body.mentions(slot),
        }
    }

    fn eval(&self, env: &mut [usize]) -> bool {
        match self {
            Node::Const(b) => *b,
            Node::Atom { table, a, b } => table.get(env[*a], env[*b]),
            Node::Not(n) => !n.eval(env),
            Node::And(v) => v.iter().all(|n| n.eval(env)),
            Node::Or(v) => v.iter().any(|n| n.eval(env)),
            Node::Iff(a, b) => a.eval(env) == b.eval(env),
            Node::Exists { slot, size, body } => (0..*size).any(|i| {
                env[*slot] = i;
                body.eval(env)
            }),
            Node::Forall { slot, size, body } => (0..*size).all(|i| {
                env[*slot] = i;
                body.eval(env)
            }),
        }
    }
}

/// A formula compiled against one model.
#[derive(Debug)]
pub struct Compiled {
    root: Node,
    slots: usize,
    arity: usize,
}

impl Compiled {
    /// Evaluate with the free variables bound to the given domain positions.
    pub fn eval(&self, args: &[usize]) -> bool {
        debug_assert_eq!(args.len(), self.arity);
        let mut env = vec![0; self.slots.max(1)];
        env[..args.len()].copy_from_slice(args);
        self.root.eval(&mut env)
    }
}

pub type Assignment = BTreeMap<Var, Elem>;

/// `structure |= f[assignment]`.
pub fn eval(structure: &Structure, f: &Formula, assignment: &Assignment) -> Result<bool> {
    let model = Model::new(structure);
    let vars: Vec<Var> = assignment.keys().cloned().collect();
    let compiled = model.compile(f, &vars)?;
    let mut args = Vec::with_capacity(vars.len());
    for (v, e) in assignment {
        if e.sort() != v.sort {
            return Err(Error::Sort(format!("{v} cannot take the value {}", structure.show(e))));
        }
        args.push(model.index_of(e)?);
    }
    Ok(compiled.eval(&args))
}

/// A pair on which a candidate definition and the relation disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub points: usize,
    pub lhs: String,
    pub rhs: String,
    pub relation_holds: bool,
}

/// First pair `(a,b)` of `model` with `f(x:=a, y:=b) ≠ r(a,b)`.
pub fn find_counterexample(model: &Model<'_>, f: &Formula, x: &Var, y: &Var, r: Relation) -> Result<Option<Counterexample>> {
    if (x.sort, y.sort) != r.sorts() {
        return Err(Error::Sort(format!("variables {x}, {y} do not fit the sorts of {r}")));
    }
    let c = model.compile(f, &[x.clone(), y.clone()])?;
    let table = model.relation_table(r);
    for (i, a) in model.domain(x.sort).iter().enumerate() {
        for (j, b) in model.domain(y.sort).iter().enumerate() {
            let want = table.get(i, j);
            if c.eval(&[i, j]) != want {
                let s = model.structure();
                return Ok(Some(Counterexample {
                    points: s.num_points(),
                    lhs: s.show(a),
                    rhs: s.show(b),
                    relation_holds: want,
                }));
            }
        }
    }
    Ok(None)
}

/// Whether `f(x,y)` defines `r` on `structure`.
pub fn defines_on(structure: &Structure, f: &Formula, x: &Var, y: &Var, r: Relation) -> Result<bool> {
    Ok(find_counterexample(&Model::new(structure), f, x, y, r)?.is_none())
}

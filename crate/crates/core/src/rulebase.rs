//! The catalog of definability rules `S ⊢ r` with their defining formulas.
//!
//! Rules are loaded from JSON (the built-in catalog is compiled in). A rule
//! in the `Symmetric` column carries no formula of its own: it is the image
//! of its `Proved` partner under the dual transform, and loading checks that
//! the transcribed premises agree with that image.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{parse_with, Counterexample, Formula, Macro, MacroEnv, Model, Var};
use crate::relation::{relation_between, Relation, RelationSet, Symmetry, Universe};
use crate::structures::Structure;

const BUILTIN: &str = include_str!("../data/rules.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Column {
    Proved,
    Symmetric,
    Implied,
    /// Intermediate definitions used inside the proofs of implied rows.
    Auxiliary,
    /// Dual images generated at load time for rows without a transcribed partner.
    Image,
    /// `{r} ⊢ r`.
    Trivial,
}

impl Column {
    fn tag(self) -> &'static str {
        match self {
            Column::Proved => "P",
            Column::Symmetric => "S",
            Column::Implied => "I",
            Column::Auxiliary => "A",
            Column::Image => "G",
            Column::Trivial => "T",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    #[default]
    Sound,
    /// Transcribed as given but known to fail; kept out of the rule database.
    Refuted,
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub id: usize,
    pub table: String,
    pub row: u32,
    pub column: Column,
    pub premises: RelationSet,
    pub conclusion: Relation,
    pub formula: Option<Formula>,
    pub chain: Vec<String>,
    pub status: Status,
    /// For `Symmetric` and `Image` rows, the rule whose dual this is.
    pub image_of: Option<usize>,
}

impl Rule {
    /// Short label such as `6.P3` (table 6, proved row 3).
    pub fn label(&self) -> String {
        match self.column {
            Column::Trivial => format!("T.{}", self.conclusion),
            Column::Image => format!("{}.G{}", self.table, self.row),
            c => format!("{}.{}{}", self.table, c.tag(), self.row),
        }
    }

    /// The universe the rule's table works in.
    pub fn universe(&self) -> Universe {
        table_universe(&self.table)
    }

    /// Free variables `x`, `y` of the sorts of the conclusion.
    pub fn vars(&self) -> (Var, Var) {
        rule_vars(self.conclusion)
    }

    pub fn is_sound(&self) -> bool {
        self.status == Status::Sound
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊢ {}", self.premises, self.conclusion)
    }
}

pub fn table_universe(table: &str) -> Universe {
    match table {
        "3" => Universe::Iplus,
        "4" => Universe::Mplus,
        _ => Universe::Rplus,
    }
}

pub fn rule_vars(r: Relation) -> (Var, Var) {
    let (s1, s2) = r.sorts();
    (Var::new("x", s1), Var::new("y", s2))
}

/// A macro that is claimed to define a union of relations.
#[derive(Clone, Debug)]
pub struct MacroClaim {
    pub name: String,
    pub defines: RelationSet,
    pub status: Status,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMacro {
    name: String,
    params: [String; 2],
    formula: Option<String>,
    dual_of: Option<String>,
    #[serde(default)]
    swap: bool,
    base: Option<String>,
    #[serde(default)]
    substitute: BTreeMap<String, String>,
    #[serde(default)]
    defines: Vec<Relation>,
    #[serde(default)]
    status: Status,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    table: String,
    row: u32,
    column: Column,
    premises: Vec<Relation>,
    conclusion: Relation,
    formula: Option<String>,
    #[serde(default)]
    chain: Vec<String>,
    #[serde(default)]
    status: Status,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawFile {
    Full { #[serde(default)] macros: Vec<RawMacro>, rules: Vec<RawRule> },
    Bare(Vec<RawRule>),
}

/// Dual image of a definition of `r` in variables `x`, `y`: a definition of
/// `r.symmetric()` in the same variables.
pub fn dual_definition(f: &Formula, r: Relation, x: &Var, y: &Var) -> Result<Formula> {
    let g = f.dual_transform()?;
    Ok(if r.classify()? == Symmetry::Symmetric { g.swap_free(x, y) } else { g })
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub macros: MacroEnv,
    pub claims: Vec<MacroClaim>,
    pub rules: Vec<Rule>,
}

impl Catalog {
    pub fn builtin() -> Result<Catalog> {
        Catalog::from_json(BUILTIN)
    }

    pub fn load(path: &Path) -> Result<Catalog> {
        Catalog::from_json(&std::fs::read_to_string(path)?)
    }

    /// Built-in catalog, or the file at `path` when given.
    pub fn builtin_or(path: Option<&Path>) -> Result<Catalog> {
        match path {
            Some(p) => Catalog::load(p),
            None => Catalog::builtin(),
        }
    }

    pub fn from_json(text: &str) -> Result<Catalog> {
        let (raw_macros, raw_rules) = match serde_json::from_str(text)? {
            RawFile::Full { macros, rules } => (macros, rules),
            RawFile::Bare(rules) => (Vec::new(), rules),
        };
        let mut env = MacroEnv::new();
        let mut claims = Vec::new();
        for m in raw_macros {
            let built = build_macro(&env, &m)?;
            env.insert(built)?;
            if !m.defines.is_empty() {
                let defines = RelationSet::try_from_relations(m.defines.iter().copied())?;
                let (a, b) = m.defines[0].sorts();
                let (s1, s2) = (Var::parse(&m.params[0])?.sort, Var::parse(&m.params[1])?.sort);
                if m.defines.iter().any(|r| r.sorts() != (a, b)) || (a, b) != (s1, s2) {
                    return Err(Error::Data(format!("macro @{} claims relations of the wrong sorts", m.name)));
                }
                claims.push(MacroClaim { name: m.name.clone(), defines, status: m.status });
            }
        }

        let mut rules: Vec<Rule> = Vec::new();
        for raw in raw_rules {
            let id = rules.len();
            let premises = RelationSet::try_from_relations(raw.premises.iter().copied())?;
            if !raw.conclusion.is_canonical() {
                return Err(Error::Data(format!("conclusion {} is not canonical", raw.conclusion)));
            }
            let formula = match &raw.formula {
                Some(text) => Some(parse_with(text, &env)?),
                None => None,
            };
            let rule = Rule {
                id,
                table: raw.table,
                row: raw.row,
                column: raw.column,
                premises,
                conclusion: raw.conclusion,
                formula,
                chain: raw.chain,
                status: raw.status,
                image_of: None,
            };
            rules.push(rule);
        }

        // Symmetric rows take their formula from the proved partner.
        for i in 0..rules.len() {
            if rules[i].column != Column::Symmetric {
                continue;
            }
            let partner = rules
                .iter()
                .position(|p| p.column == Column::Proved && p.table == rules[i].table && p.row == rules[i].row)
                .ok_or_else(|| Error::Data(format!("{} has no proved partner", rules[i].label())))?;
            let p = &rules[partner];
            let want = (p.premises.symmetric(), p.conclusion.symmetric());
            if (rules[i].premises, rules[i].conclusion) != want {
                return Err(Error::Data(format!(
                    "{} is transcribed as {} but the dual of {} is {} ⊢ {}",
                    rules[i].label(),
                    rules[i],
                    p,
                    want.0,
                    want.1
                )));
            }
            let (x, y) = p.vars();
            let f = match &p.formula {
                Some(f) => Some(dual_definition(f, p.conclusion, &x, &y)?),
                None => None,
            };
            if rules[i].formula.is_none() {
                rules[i].formula = f;
            }
            rules[i].image_of = Some(partner);
        }

        for r in &rules {
            check_rule(r)?;
        }

        // Images for rules whose dual is a different rule and was not transcribed.
        let partnered: HashSet<usize> = rules.iter().filter_map(|r| r.image_of).collect();
        let mut images = Vec::new();
        let mut rows: BTreeMap<String, u32> = BTreeMap::new();
        for r in &rules {
            let eligible = matches!(r.column, Column::Proved | Column::Auxiliary) && r.is_sound();
            let Some(f) = &r.formula else { continue };
            if !eligible || partnered.contains(&r.id) {
                continue;
            }
            let (p, c) = (r.premises.symmetric(), r.conclusion.symmetric());
            if (p, c) == (r.premises, r.conclusion) {
                continue;
            }
            let (x, y) = r.vars();
            let row = rows.entry(r.table.clone()).or_insert(0);
            *row += 1;
            images.push(Rule {
                id: 0,
                table: r.table.clone(),
                row: *row,
                column: Column::Image,
                premises: p,
                conclusion: c,
                formula: Some(dual_definition(f, r.conclusion, &x, &y)?),
                chain: Vec::new(),
                status: Status::Sound,
                image_of: Some(r.id),
            });
        }
        for r in Universe::Rplus.set().iter() {
            let (x, y) = rule_vars(r);
            images.push(Rule {
                id: 0,
                table: "T".into(),
                row: 0,
                column: Column::Trivial,
                premises: RelationSet::singleton(r),
                conclusion: r,
                formula: Some(Formula::atom(r, x, y)?),
                chain: Vec::new(),
                status: Status::Sound,
                image_of: None,
            });
        }
        for mut r in images {
            r.id = rules.len();
            rules.push(r);
        }
        Ok(Catalog { macros: env, claims, rules })
    }

    pub fn rule(&self, id: usize) -> Option<&Rule> {
        self.rules.get(id)
    }

    /// Rules that feed closure: every sound rule with a formula or a dual
    /// image of one, excluding implied rows, deduplicated on `(S, r)`.
    pub fn database(&self) -> Vec<&Rule> {
        let mut seen = HashSet::new();
        self.rules
            .iter()
            .filter(|r| r.is_sound() && r.column != Column::Implied)
            .filter(|r| seen.insert((r.premises, r.conclusion)))
            .collect()
    }

    /// Number of proved and symmetric rows.
    pub fn table_rule_count(&self) -> usize {
        self.rules.iter().filter(|r| matches!(r.column, Column::Proved | Column::Symmetric)).count()
    }

    /// Check one rule on every linear order with `1..=max_points` points.
    pub fn verify_rule(&self, id: usize, max_points: usize) -> Result<Verification> {
        let rule = self.rule(id).ok_or_else(|| Error::Data(format!("no rule with id {id}")))?;
        let outcome = match &rule.formula {
            None => Outcome::NoFormula,
            Some(f) => {
                let (x, y) = rule.vars();
                match check_definition(f, &x, &y, RelationSet::singleton(rule.conclusion), max_points)? {
                    None => Outcome::Holds,
                    Some(c) => Outcome::Fails(c),
                }
            }
        };
        Ok(Verification { id, label: rule.label(), expected_to_fail: !rule.is_sound(), outcome })
    }

    /// Check every formula-bearing rule and every macro claim, in parallel.
    pub fn verify_all(&self, max_points: usize) -> Result<VerifyReport> {
        let rules = self
            .rules
            .par_iter()
            .filter(|r| r.formula.is_some())
            .map(|r| self.verify_rule(r.id, max_points))
            .collect::<Result<Vec<_>>>()?;
        let macros = self
            .claims
            .par_iter()
            .map(|c| {
                let m = self.macros.get(&c.name).expect("claims refer to defined macros");
                let outcome = match check_definition(&m.body, &m.params.0, &m.params.1, c.defines, max_points)? {
                    None => Outcome::Holds,
                    Some(ce) => Outcome::Fails(ce),
                };
                Ok(Verification {
                    id: 0,
                    label: format!("@{}", c.name),
                    expected_to_fail: c.status == Status::Refuted,
                    outcome,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VerifyReport { max_points, table_rules: self.table_rule_count(), rules, macros })
    }
}

fn build_macro(env: &MacroEnv, m: &RawMacro) -> Result<Arc<Macro>> {
    let params = (Var::parse(&m.params[0])?, Var::parse(&m.params[1])?);
    let lookup = |name: &str| {
        env.get(name).cloned().ok_or_else(|| Error::Data(format!("macro @{} refers to unknown @{name}", m.name)))
    };
    let body = match (&m.formula, &m.dual_of, &m.base) {
        (Some(text), None, None) => parse_with(text, env)?,
        (None, Some(src), None) => {
            let src = lookup(src)?;
            let g = src.body.dual_transform()?;
            let g = if m.swap { g.swap_free(&src.params.0, &src.params.1) } else { g };
            rename_params(&g, &src.params, &params)
        }
        (None, None, Some(base)) => {
            let base = lookup(base)?;
            let mut g = rename_params(&base.body, &base.params, &params);
            for (rel, name) in &m.substitute {
                g = g.substitute(rel.parse()?, &lookup(name)?)?;
            }
            g
        }
        _ => {
            return Err(Error::Data(format!(
                "macro @{} needs exactly one of `formula`, `dual_of` or `base`",
                m.name
            )))
        }
    };
    Macro::new(m.name.clone(), params, body)
}

fn rename_params(f: &Formula, from: &(Var, Var), to: &(Var, Var)) -> Formula {
    if from == to {
        return f.clone();
    }
    let map = BTreeMap::from([(from.0.clone(), to.0.clone()), (from.1.clone(), to.1.clone())]);
    f.rename_free(&map)
}

fn check_rule(r: &Rule) -> Result<()> {
    let Some(f) = &r.formula else {
        if matches!(r.column, Column::Proved | Column::Auxiliary) {
            return Err(Error::Data(format!("{} has no formula", r.label())));
        }
        return Ok(());
    };
    let (x, y) = r.vars();
    if let Some(v) = f.free_vars().into_iter().find(|v| *v != x && *v != y) {
        return Err(Error::Data(format!("{}: free variable {v} is not one of {x}, {y}", r.label())));
    }
    let sig = f.signature()?;
    if !sig.is_subset(r.premises) {
        return Err(Error::Data(format!(
            "{}: formula uses {} outside the premises {}",
            r.label(),
            sig - r.premises,
            r.premises
        )));
    }
    Ok(())
}

/// First pair on a linear order of at most `max_points` points where
/// `f(x,y)` disagrees with membership of the pair's relation in `targets`.
pub fn check_definition(
    f: &Formula,
    x: &Var,
    y: &Var,
    targets: RelationSet,
    max_points: usize,
) -> Result<Option<Counterexample>> {
    for n in 1..=max_points {
        let s = Structure::linear_order(n)?;
        if let Some(c) = counterexample_on(&s, f, x, y, targets)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

pub fn counterexample_on(
    s: &Structure,
    f: &Formula,
    x: &Var,
    y: &Var,
    targets: RelationSet,
) -> Result<Option<Counterexample>> {
    let model = Model::new(s);
    let compiled = model.compile(f, &[x.clone(), y.clone()])?;
    let (dx, dy) = (model.domain(x.sort), model.domain(y.sort));
    for (i, a) in dx.iter().enumerate() {
        for (j, b) in dy.iter().enumerate() {
            let want = targets.contains(relation_between(a, b));
            if compiled.eval(&[i, j]) != want {
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

#[derive(Clone, Debug)]
pub enum Outcome {
    Holds,
    Fails(Counterexample),
    NoFormula,
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub id: usize,
    pub label: String,
    pub expected_to_fail: bool,
    pub outcome: Outcome,
}

impl Verification {
    /// Holds when sound, or fails when marked refuted.
    pub fn as_expected(&self) -> bool {
        match self.outcome {
            Outcome::Holds => !self.expected_to_fail,
            Outcome::Fails(_) => self.expected_to_fail,
            Outcome::NoFormula => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub max_points: usize,
    pub table_rules: usize,
    pub rules: Vec<Verification>,
    pub macros: Vec<Verification>,
}

impl VerifyReport {
    pub fn unexpected(&self) -> impl Iterator<Item = &Verification> {
        self.rules.iter().chain(&self.macros).filter(|v| !v.as_expected())
    }

    pub fn all_as_expected(&self) -> bool {
        self.unexpected().next().is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::*;

    #[test]
    fn builtin_loads() {
        let c = Catalog::builtin().unwrap();
        assert!(c.table_rule_count() > 50);
        assert!(c.rules.iter().all(|r| r.column != Column::Symmetric || r.formula.is_some()));
        let db = c.database();
        assert!(db.iter().all(|r| r.is_sound() && r.column != Column::Implied));
    }

    #[test]
    fn transitivity_rule_verifies() {
        let c = Catalog::builtin().unwrap();
        let r = c
            .rules
            .iter()
            .find(|r| r.column == Column::Proved && r.premises == RelationSet::of(&[II34]) && r.conclusion == II44)
            .unwrap();
        assert!(matches!(c.verify_rule(r.id, 5).unwrap().outcome, Outcome::Holds));
    }

    #[test]
    fn mutated_formula_is_caught() {
        let f = parse_with("E z_i (ii34(x_i,z_i) & ii44(z_i,y_i))", &MacroEnv::new()).unwrap();
        let (x, y) = rule_vars(II44);
        let c = check_definition(&f, &x, &y, RelationSet::singleton(II44), 5).unwrap();
        assert!(c.is_some());
    }

    #[test]
    fn refuted_helper_fails() {
        let c = Catalog::builtin().unwrap();
        let refuted: Vec<_> = c.rules.iter().filter(|r| !r.is_sound()).collect();
        assert!(!refuted.is_empty());
        for r in refuted {
            assert!(matches!(c.verify_rule(r.id, 4).unwrap().outcome, Outcome::Fails(_)), "{}", r.label());
        }
    }

    #[test]
    fn symmetric_row_mismatch_is_rejected() {
        let text = r#"[
          {"table":"9","row":1,"column":"Proved","premises":["ii34"],"conclusion":"ii44",
           "formula":"E z_i (ii34(x_i,z_i) & ii34(z_i,y_i))"},
          {"table":"9","row":1,"column":"Symmetric","premises":["ii14"],"conclusion":"ii44"}
        ]"#;
        assert!(matches!(Catalog::from_json(text), Err(Error::Data(_))));
    }

    #[test]
    fn signature_outside_premises_is_rejected() {
        let text = r#"[{"table":"9","row":1,"column":"Proved","premises":["ii14"],"conclusion":"ii44",
           "formula":"E z_i (ii34(x_i,z_i) & ii34(z_i,y_i))"}]"#;
        assert!(matches!(Catalog::from_json(text), Err(Error::Data(_))));
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ptint_core::closure::Step;
use ptint_core::formula::{eval, parse_with, Assignment};
use ptint_core::rulebase::{Outcome, Verification};
use ptint_core::witness::{search_witness, Construction, Report};
use ptint_core::{
    Catalog, Class, Engine, Lattice, Relation, RelationSet, RuleDb, SampleBounds, Structure, Universe, Var, Witness,
    WitnessCatalog,
};

#[derive(Parser)]
#[command(name = "ptint", version, about = "Definability of point and interval relations over linear orders")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Opts {
    /// Rplus, Iplus, Mplus or Pplus
    #[arg(long, global = true, default_value = "Rplus")]
    universe: Universe,
    /// lin (all linear orders) or dis (discrete ones)
    #[arg(long, global = true, default_value = "lin")]
    class: Class,
    /// Largest order checked (verify-definitions: 5, search-witness: 3).
    #[arg(long, global = true)]
    max_points: Option<usize>,
    /// Rule catalog JSON replacing the built-in one.
    #[arg(long, global = true)]
    rules: Option<PathBuf>,
    /// Witness catalog JSON replacing the built-in one.
    #[arg(long, global = true)]
    witnesses: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Same as `--format human`.
    #[arg(long, global = true)]
    human: bool,
    /// Worker threads; defaults to available parallelism
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Human,
    Dot,
}

#[derive(Subcommand)]
enum Verb {
    /// Closure of a set with the rule firing that derived each relation.
    Closure {
        #[arg(long)]
        set: RelationSet,
    },
    /// Whether a set defines a relation, with the deduction chain.
    Defines {
        #[arg(long)]
        set: RelationSet,
        #[arg(long)]
        target: Relation,
    },
    /// Minimal sets defining the target.
    Mcs {
        #[arg(long)]
        target: Relation,
    },
    /// Maximal sets not defining the target.
    Mis {
        #[arg(long)]
        target: Relation,
    },
    /// Minimally complete and maximally incomplete sets of the universe.
    Harvest,
    /// Compare the expressive power of two sets.
    Equiv {
        #[arg(long)]
        set: RelationSet,
        #[arg(long)]
        with: RelationSet,
    },
    /// Check every catalog formula on all small linear orders.
    VerifyDefinitions,
    /// Check every catalog witness.
    VerifyWitnesses,
    /// Look for a small witness that `set` does not define `target`.
    SearchWitness {
        #[arg(long)]
        set: RelationSet,
        #[arg(long)]
        target: Relation,
    },
    /// Evaluate a formula on the n-point order `0 < 1 < ... < n-1`.
    Eval {
        #[arg(long)]
        points: usize,
        #[arg(long)]
        formula: String,
        /// `var=value`, e.g. `x_i=[0,1]` or `y_p=2`; repeatable.
        #[arg(long)]
        assign: Vec<String>,
    },
    /// Lattice of expressively different fragments.
    Lattice,
}

/// What a verb prints and how it exits.
struct Answer {
    json: Value,
    human: String,
    dot: Option<String>,
    affirmative: bool,
}

impl Answer {
    fn new(json: Value, human: String, affirmative: bool) -> Answer {
        Answer { json, human, dot: None, affirmative }
    }
}

type Res<T> = Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn sets(v: &[RelationSet]) -> Value {
    json!(v.iter().map(|s| s.tokens()).collect::<Vec<_>>())
}

fn steps_json(steps: &[Step]) -> Value {
    json!(steps
        .iter()
        .map(|s| json!({"rule": s.label, "premises": s.premises, "conclusion": s.conclusion}))
        .collect::<Vec<_>>())
}

fn lines<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|s| format!("{s}\n")).collect()
}

fn within(u: Universe, s: RelationSet) -> Res<()> {
    if s.is_subset(u.set()) {
        Ok(())
    } else {
        Err(format!("{} lies outside {u}", s - u.set()))
    }
}

struct Ctx<'a> {
    opts: &'a Opts,
}

impl Ctx<'_> {
    fn catalog(&self) -> Res<Catalog> {
        Catalog::builtin_or(self.opts.rules.as_deref()).map_err(err)
    }

    fn engine(&self) -> Res<Engine> {
        Ok(Engine::new(&RuleDb::from_catalog(&self.catalog()?), self.opts.universe))
    }

    fn run(&self, verb: &Verb) -> Res<Answer> {
        let u = self.opts.universe;
        match verb {
            Verb::Closure { set } => {
                within(u, *set)?;
                let res = self.engine()?.closure(*set).map_err(err)?;
                let steps: Vec<Step> = res.order.iter().map(|r| res.derivation[r].clone()).collect();
                let json = json!({"input": set, "closure": res.closed, "derivation": steps_json(&steps)});
                let human = format!("closure {} = {}\n{}", set, res.closed, lines(&steps));
                Ok(Answer::new(json, human, true))
            }
            Verb::Defines { set, target } => {
                within(u, set.with(*target))?;
                let chain = self.engine()?.defines(*set, *target).map_err(err)?;
                let yes = chain.is_some();
                let steps = chain.unwrap_or_default();
                let json = json!({"set": set, "target": target, "defines": yes, "chain": steps_json(&steps)});
                let human = if yes { format!("yes\n{}", lines(&steps)) } else { "no\n".to_string() };
                Ok(Answer::new(json, human, yes))
            }
            Verb::Mcs { target } | Verb::Mis { target } => {
                within(u, RelationSet::singleton(*target))?;
                let e = self.engine()?;
                let (key, found) = match verb {
                    Verb::Mcs { .. } => ("mcs", e.mcs(*target).map_err(err)?),
                    _ => ("mis", e.mis(*target).map_err(err)?),
                };
                let json = json!({"universe": u, "target": target, key: sets(&found)});
                Ok(Answer::new(json, lines(&found), true))
            }
            Verb::Harvest => {
                let h = self.engine()?.harvest();
                let json = json!({
                    "universe": u,
                    "class": self.opts.class,
                    "mcs": sets(&h.mcs),
                    "mis": sets(&h.mis),
                });
                let human = format!(
                    "{u}: {} minimally complete, {} maximally incomplete\nmcs\n{}mis\n{}",
                    h.mcs.len(),
                    h.mis.len(),
                    lines(h.mcs.iter().map(|s| format!("  {s}"))),
                    lines(h.mis.iter().map(|s| format!("  {s}"))),
                );
                Ok(Answer::new(json, human, true))
            }
            Verb::Equiv { set, with } => {
                within(u, *set | *with)?;
                let e = self.engine()?;
                let cmp = e.compare(*set, *with).map_err(err)?;
                let (a, b) = (e.close(*set).map_err(err)?, e.close(*with).map_err(err)?);
                let json = json!({"left": set, "right": with, "left_closure": a, "right_closure": b, "comparison": cmp});
                let human = format!("{cmp}\n{set} -> {a}\n{with} -> {b}\n");
                Ok(Answer::new(json, human, cmp == ptint_core::closure::Comparison::Equal))
            }
            Verb::VerifyDefinitions => self.verify_definitions(),
            Verb::VerifyWitnesses => self.verify_witnesses(),
            Verb::SearchWitness { set, target } => {
                let n = self.opts.max_points.unwrap_or(3);
                let found = search_witness(*set, *target, n).map_err(err)?;
                let json = json!({
                    "set": set,
                    "target": target,
                    "max_points": n,
                    "witness": found.as_ref().map(witness_json),
                });
                let human = match &found {
                    Some(w) => format!("found\n{}", witness_pairs(w).iter().map(|(a, b)| format!("  {a} -> {b}\n")).collect::<String>()),
                    None => format!("none on at most {n} points\n"),
                };
                Ok(Answer::new(json, human, found.is_some()))
            }
            Verb::Eval { points, formula, assign } => {
                let s = Structure::linear_order(*points).map_err(err)?;
                let f = parse_with(formula, &self.catalog()?.macros).map_err(err)?;
                let mut a = Assignment::new();
                for item in assign {
                    let (v, e) = item.split_once('=').ok_or_else(|| format!("malformed assignment `{item}`"))?;
                    a.insert(Var::parse(v).map_err(err)?, s.parse_element(e).map_err(err)?);
                }
                let value = eval(&s, &f, &a).map_err(err)?;
                let json = json!({"points": points, "formula": f.to_string(), "value": value});
                Ok(Answer::new(json, format!("{value}\n"), value))
            }
            Verb::Lattice => {
                let l = Lattice::build(&self.engine()?);
                let nodes: Vec<Value> = l
                    .nodes
                    .iter()
                    .map(|n| json!({"id": n.id, "closed": n.closed, "label": n.label}))
                    .collect();
                let json = json!({"universe": u, "nodes": nodes, "edges": l.edges});
                let human = format!(
                    "{u}: {} nodes, {} cover edges\n{}",
                    l.nodes.len(),
                    l.edges.len(),
                    lines(l.nodes.iter().map(|n| format!("  n{} {} = {}", n.id, n.label, n.closed)))
                );
                Ok(Answer { dot: Some(l.to_dot()), ..Answer::new(json, human, true) })
            }
        }
    }

    fn verify_definitions(&self) -> Res<Answer> {
        let n = self.opts.max_points.unwrap_or(5);
        let report = self.catalog()?.verify_all(n).map_err(err)?;
        let entry = |v: &Verification| {
            let (outcome, cex) = match &v.outcome {
                Outcome::Holds => ("holds", Value::Null),
                Outcome::NoFormula => ("no-formula", Value::Null),
                Outcome::Fails(c) => (
                    "fails",
                    json!({"points": c.points, "lhs": c.lhs, "rhs": c.rhs, "relation_holds": c.relation_holds}),
                ),
            };
            json!({
                "label": v.label,
                "status": if v.expected_to_fail { "refuted" } else { "sound" },
                "outcome": outcome,
                "counterexample": cex,
                "as_expected": v.as_expected(),
            })
        };
        let unexpected: Vec<&Verification> = report.unexpected().collect();
        let json = json!({
            "max_points": n,
            "table_rules": report.table_rules,
            "rules": report.rules.iter().map(entry).collect::<Vec<_>>(),
            "macros": report.macros.iter().map(entry).collect::<Vec<_>>(),
            "unexpected": unexpected.iter().map(|v| v.label.clone()).collect::<Vec<_>>(),
        });
        let checked = report.rules.iter().filter(|v| !matches!(v.outcome, Outcome::NoFormula)).count();
        let refuted: Vec<String> = report
            .rules
            .iter()
            .chain(&report.macros)
            .filter(|v| v.expected_to_fail)
            .map(|v| v.label.clone())
            .collect();
        let mut human = format!(
            "{checked} rule formulas and {} macros checked on orders of 1..={n} points\nrefuted as recorded: {}\n",
            report.macros.len(),
            refuted.join(", ")
        );
        for v in &unexpected {
            human.push_str(&format!("UNEXPECTED {}: {:?}\n", v.label, v.outcome));
        }
        Ok(Answer::new(json, human, unexpected.is_empty()))
    }

    fn verify_witnesses(&self) -> Res<Answer> {
        let cat = WitnessCatalog::builtin_or(self.opts.witnesses.as_deref()).map_err(err)?;
        let db = RuleDb::from_catalog(&self.catalog()?);
        let bounds = SampleBounds::default();
        let mut all_ok = true;
        let mut entries = Vec::new();
        let mut human = String::new();
        for w in &cat.witnesses {
            let rep = w.check(&bounds).map_err(err)?;
            let clash = db.restrict(w.universe.set()).close(w.respects) & w.breaks;
            let ok = rep.passed() == w.is_sound() && (clash.is_empty() || !w.is_sound());
            all_ok &= ok;
            human.push_str(&format!(
                "{:<12} {:<16} {} {} respects {} breaks {}{}\n",
                w.id,
                format!("{:?}", w.kind()),
                if rep.passed() { "pass" } else { "FAIL" },
                if w.is_sound() { "" } else { "(refuted)" },
                w.respects,
                w.breaks,
                if clash.is_empty() { String::new() } else { format!(" closure clash {clash}") },
            ));
            entries.push(json!({
                "id": w.id,
                "provenance": w.provenance(),
                "status": if w.is_sound() { "sound" } else { "refuted" },
                "report": report_json(&rep),
                "closure_clash": clash,
                "as_expected": ok,
            }));
        }
        Ok(Answer::new(json!({"witnesses": entries, "all_as_expected": all_ok}), human, all_ok))
    }
}

fn report_json(r: &Report) -> Value {
    serde_json::to_value(r).expect("reports serialize")
}

fn witness_pairs(w: &Witness) -> Vec<(String, String)> {
    match &w.construction {
        Construction::Finite(z) => (0..z.pairs.len()).map(|i| z.show_pair(i)).collect(),
        Construction::Sampled(_) => Vec::new(),
    }
}

fn witness_json(w: &Witness) -> Value {
    let points = match &w.construction {
        Construction::Finite(z) => z.source.num_points(),
        Construction::Sampled(_) => 0,
    };
    json!({"points": points, "respects": w.respects, "breaks": w.breaks, "pairs": witness_pairs(w)})
}

/// Pretty JSON with arrays of scalars kept on one line, so a set is one line
/// of a diff.
fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    let flat = |v: &Value| !matches!(v, Value::Array(_) | Value::Object(_));
    match v {
        Value::Array(items) if items.iter().all(flat) => out.push_str(&serde_json::to_string(v).expect("scalars serialize")),
        Value::Array(items) if !items.is_empty() => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                render(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&format!("{pad}{}: ", Value::String(k.clone())));
                render(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        _ => out.push_str(&serde_json::to_string(v).expect("values serialize")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.opts.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let format = if cli.opts.human { Format::Human } else { cli.opts.format };
    match (Ctx { opts: &cli.opts }).run(&cli.verb) {
        Ok(a) => {
            match format {
                Format::Json => {
                    let mut out = String::new();
                    render(&a.json, 0, &mut out);
                    println!("{out}");
                }
                Format::Human => print!("{}", a.human),
                Format::Dot => match &a.dot {
                    Some(d) => print!("{d}"),
                    None => {
                        eprintln!("error: --format dot applies to `lattice` only");
                        return ExitCode::from(2);
                    }
                },
            }
            if a.affirmative {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

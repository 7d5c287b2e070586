//! Acceptance harness: one pass/fail line per criterion. Exits nonzero only
//! when a result differs from what is expected, so a criterion recorded as
//! unattainable fails loudly but only with its frozen, analysed difference.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ptint_core::relation::*;
use ptint_core::rulebase::{Column, Outcome};
use ptint_core::witness::{breakable, search_witness, Construction, SampleBounds};
use ptint_core::{Catalog, Engine, Lattice, Relation, RelationSet, Universe, WitnessCatalog};

use common::{dual_transform_failures, expected_harvest, mis_rows, preservation_violations, relation_law_failures};

struct Verdict {
    pass: bool,
    /// Whether `pass` is the recorded outcome.
    expected: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn of(pass: bool, summary: String, details: Vec<String>) -> Verdict {
        Verdict { pass, expected: true, summary, details }
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn sorted(mut v: Vec<RelationSet>) -> Vec<RelationSet> {
    v.sort_by_key(|s| s.sort_key());
    v.dedup();
    v
}

fn show(v: &[RelationSet]) -> String {
    v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

fn criterion_1() -> Verdict {
    let expected = expected_harvest();
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    let mut counts = Vec::new();
    for u in [Universe::Rplus, Universe::Iplus, Universe::Mplus] {
        let h = Engine::builtin(u).unwrap().harvest();
        let want = &expected[&u];
        let (wm, wi) = (sorted(want.mcs.clone()), sorted(want.mis.clone()));
        if sorted(h.mcs.clone()) != wm || sorted(h.mis.clone()) != wi {
            pass = false;
            details.push(format!("{u}: got mcs {} mis {}", show(&h.mcs), show(&h.mis)));
        }
        counts.push(format!("{u} {}/{}", h.mcs.len(), h.mis.len()));
    }
    let took = start.elapsed();
    pass &= took < Duration::from_secs(10);
    Verdict::of(pass, format!("harvest {} in {}", counts.join(", "), secs(took)), details)
}

/// Relations whose spectra the tables state explicitly, with the table
/// holding their rows.
const SPECTRA: [(Universe, &str, Relation); 20] = [
    (Universe::Iplus, "3", EQ_I),
    (Universe::Iplus, "3", II34),
    (Universe::Iplus, "3", II14),
    (Universe::Iplus, "3", II24),
    (Universe::Iplus, "3", II04),
    (Universe::Iplus, "3", II44),
    (Universe::Mplus, "4", IP0),
    (Universe::Mplus, "4", IP1),
    (Universe::Mplus, "4", IP2),
    (Universe::Rplus, "5L", EQ_P),
    (Universe::Rplus, "5R", EQ_I),
    (Universe::Rplus, "6", LT),
    (Universe::Rplus, "7", IP0),
    (Universe::Rplus, "8", IP1),
    (Universe::Rplus, "9", IP2),
    (Universe::Rplus, "10a", II34),
    (Universe::Rplus, "10b", II14),
    (Universe::Rplus, "10c", II24),
    (Universe::Rplus, "10d", II04),
    (Universe::Rplus, "10e", II44),
];

/// The analysed difference between engine spectra and the printed tables;
/// see the ledger for why each line is a table omission or error.
const FROZEN_SPECTRA_DIFF: &[&str] = &[
    "mis Iplus ii24: table-only [] engine-only [{=i, ii04, ii44}]",
    "mis Iplus ii04: table-only [] engine-only [{=i, ii24, ii44}]",
    "mis Iplus ii44: table-only [] engine-only [{=i, ii24, ii04}]",
    "mis Mplus ip0: table-only [] engine-only [{ip1} {ip2}]",
    "mcs Rplus ip2: table-only [] engine-only [{<, ip4, ii34}]",
    "mcs Rplus ii14: table-only [{<, ip0, ii03}] engine-only [{ip0, ii03}]",
    "mis Rplus ii04: table-only [{=p, =i, <, ip2, ii24, ii44}] engine-only [{=p, =i, ip2, ii44} {=p, =i, <, ip2, ii24} {=p, =i, <, ii24, ii44}]",
    "mis Rplus ii44: table-only [] engine-only [{=p, =i, <, ip2, ii24, ii04}]",
];

fn spectra_diff() -> Vec<String> {
    let catalog = Catalog::builtin().unwrap();
    let rows = mis_rows();
    let mut diff = Vec::new();
    for (u, table, r) in SPECTRA {
        let e = Engine::builtin(u).unwrap();
        let tabled: Vec<RelationSet> = catalog
            .rules
            .iter()
            .filter(|x| x.table == table && x.conclusion == r && x.is_sound())
            .filter(|x| matches!(x.column, Column::Proved | Column::Symmetric | Column::Implied))
            .map(|x| x.premises)
            .chain([RelationSet::singleton(r)])
            .collect();
        let minimal = sorted(tabled.iter().copied().filter(|s| !tabled.iter().any(|t| t != s && t.is_subset(*s))).collect());
        let non_minimal = sorted(tabled.iter().copied().filter(|s| !minimal.contains(s)).collect());
        let mcs = e.mcs(r).unwrap();
        let table_only: Vec<RelationSet> = minimal.iter().copied().filter(|s| !mcs.contains(s)).collect();
        let engine_only: Vec<RelationSet> = mcs.iter().copied().filter(|s| !minimal.contains(s)).collect();
        if !table_only.is_empty() || !engine_only.is_empty() {
            diff.push(format!("mcs {u} {r}: table-only [{}] engine-only [{}]", show(&table_only), show(&engine_only)));
        }
        if !non_minimal.is_empty() {
            diff.push(format!("mcs {u} {r}: non-minimal rows [{}]", show(&non_minimal)));
        }

        let printed = sorted(rows[&u].iter().filter(|row| row.bullets.contains(r)).map(|row| row.set).collect());
        let mis = e.mis(r).unwrap();
        let printed_only: Vec<RelationSet> = printed.iter().copied().filter(|s| !mis.contains(s)).collect();
        let engine_only: Vec<RelationSet> = mis.iter().copied().filter(|s| !printed.contains(s)).collect();
        if !printed_only.is_empty() || !engine_only.is_empty() {
            diff.push(format!("mis {u} {r}: table-only [{}] engine-only [{}]", show(&printed_only), show(&engine_only)));
        }
    }
    diff
}

fn criterion_2() -> Verdict {
    let diff = spectra_diff();
    let frozen: Vec<String> = FROZEN_SPECTRA_DIFF.iter().map(|s| s.to_string()).collect();
    let pass = diff.is_empty();
    let summary = if pass {
        format!("{} spectra match the tables", SPECTRA.len())
    } else if diff == frozen {
        format!("{} difference lines over {} spectra; the difference equals the frozen analysed set", diff.len(), SPECTRA.len())
    } else {
        format!("{} difference lines, not the frozen set", diff.len())
    };
    Verdict { pass, expected: diff == frozen, summary, details: diff }
}

fn criterion_3() -> Verdict {
    let catalog = Catalog::builtin().unwrap();
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let report = pool.install(|| catalog.verify_all(5)).unwrap();
    let took = start.elapsed();
    let all = report.rules.iter().chain(&report.macros);
    let mut details: Vec<String> = report.unexpected().map(|v| format!("unexpected: {} {:?}", v.label, v.outcome)).collect();
    let refuted: Vec<String> = all
        .clone()
        .filter(|v| v.expected_to_fail)
        .map(|v| format!("{} ({})", v.label, if matches!(v.outcome, Outcome::Fails(_)) { "counterexample found" } else { "no counterexample" }))
        .collect();
    let sound_checked = all.clone().filter(|v| !v.expected_to_fail && matches!(v.outcome, Outcome::Holds)).count();
    let table_rows = catalog.rules.iter().filter(|r| r.formula.is_some() && r.is_sound() && matches!(r.column, Column::Proved | Column::Symmetric)).count();
    if table_rows != catalog.table_rule_count() {
        details.push(format!("{table_rows} formula-bearing table rows of {}", catalog.table_rule_count()));
    }
    if !refuted.is_empty() {
        details.push(format!("refuted and reported separately: {}", refuted.join(", ")));
    }
    let pass = report.all_as_expected() && table_rows == catalog.table_rule_count() && took < Duration::from_secs(600);
    Verdict::of(
        pass,
        format!(
            "{sound_checked} sound definitions hold on orders of 1..=5 points ({table_rows} proved or symmetric rows), {} refuted items fail as marked, single worker {}",
            refuted.len(),
            secs(took)
        ),
        details,
    )
}

fn criterion_4() -> Verdict {
    let catalog = WitnessCatalog::builtin().unwrap();
    let bounds = SampleBounds::default();
    let mut details = Vec::new();
    let (mut finite, mut sampled) = (0, 0);
    let mut reports = BTreeMap::new();
    for w in catalog.witnesses.iter().filter(|w| w.is_sound()) {
        let rep = w.check(&bounds).unwrap();
        match w.construction {
            Construction::Finite(_) => finite += 1,
            Construction::Sampled(_) => sampled += 1,
        }
        if !rep.passed() {
            details.push(format!("{} does not check", w.id));
        }
        reports.insert(w.id.clone(), rep);
    }
    for w in catalog.witnesses.iter().filter(|w| !w.is_sound()) {
        let passed = w.check(&bounds).unwrap().passed();
        details.push(format!("{} is refuted and {}", w.id, if passed { "unexpectedly checks" } else { "fails as recorded" }));
    }

    // Each bullet of a table row is broken by exactly one sound witness
    // respecting that row's set. The printed row 17 is read as corrected.
    let printed_17 = catalog.get("R17-printed").unwrap().respects;
    let corrected_17 = catalog.get("R17").unwrap().respects;
    let mut rows_ok = 0;
    let mut row_total = 0;
    for (u, rows) in mis_rows() {
        for row in rows {
            row_total += 1;
            let set = if u == Universe::Rplus && row.set == printed_17 { corrected_17 } else { row.set };
            let matching: Vec<_> = catalog.witnesses.iter().filter(|w| w.is_sound() && w.universe == u && w.respects == set).collect();
            let broken = matching.iter().fold(RelationSet::EMPTY, |acc, w| acc | w.breaks);
            let once = row.bullets.iter().all(|r| matching.iter().filter(|w| w.breaks.contains(r)).count() == 1);
            if broken == row.bullets && once {
                rows_ok += 1;
            } else {
                details.push(format!("{u} row {set}: witnesses break {broken}, bullets {}", row.bullets));
            }
        }
    }

    let mut sampled_ok = true;
    for (id, need) in [("I3a", RelationSet::of(&[II34, II14, II24, II44])), ("I3b", RelationSet::singleton(II04))] {
        let got = reports[id].disagreements;
        if !need.is_subset(got) {
            sampled_ok = false;
            details.push(format!("{id} exhibits {got}, needs {need}"));
        }
    }
    let all_pass = reports.values().all(|r| r.passed());
    Verdict::of(
        all_pass && rows_ok == row_total && sampled_ok,
        format!(
            "{finite} finite and {sampled} sampled sound witnesses check; {rows_ok}/{row_total} table rows covered bullet for bullet; doubling and halving maps exhibit their breaks"
        ),
        details,
    )
}

fn criterion_5() -> Verdict {
    let e = Engine::builtin(Universe::Rplus).unwrap();
    let mis: Vec<(Relation, Vec<RelationSet>)> = RPLUS.iter().map(|&r| (r, e.mis(r).unwrap())).collect();
    let mut violations = Vec::new();
    let mut checked = 0;
    for s in Universe::Rplus.set().subsets() {
        let c = e.close(s).unwrap();
        for (r, m) in &mis {
            checked += 1;
            if c.contains(*r) == m.iter().any(|t| s.is_subset(*t)) {
                violations.push(format!("{s} and {r}"));
            }
        }
    }
    let catalog = WitnessCatalog::builtin().unwrap();
    let mut clashes = Vec::new();
    for w in catalog.witnesses.iter().filter(|w| w.is_sound()) {
        let closed = Engine::builtin(w.universe).unwrap().close(w.respects).unwrap();
        if !(closed & w.breaks).is_empty() {
            clashes.push(format!("{} breaks {} inside its closure", w.id, closed & w.breaks));
        }
    }
    let pass = violations.is_empty() && clashes.is_empty();
    violations.truncate(10);
    violations.extend(clashes.iter().cloned());
    Verdict::of(
        pass,
        format!("{checked} subset-target pairs, {} duality violations; {} witness clashes", violations.len(), clashes.len()),
        violations,
    )
}

const FROZEN_RPLUS_LATTICE: (usize, usize) = (180, 555);

fn criterion_6() -> Verdict {
    let mut details = Vec::new();
    let mut pass = true;
    let mut sizes = Vec::new();
    for (u, want) in [(Universe::Mplus, Some(10)), (Universe::Iplus, Some(19)), (Universe::Rplus, None)] {
        let l = Lattice::build(&Engine::builtin(u).unwrap());
        let auto = l.symmetric_is_automorphism();
        let ok = match want {
            Some(n) => l.nodes.len() == n,
            None => (l.nodes.len(), l.edges.len()) == FROZEN_RPLUS_LATTICE,
        };
        if !ok || !auto {
            pass = false;
            details.push(format!("{u}: {} nodes, {} edges, automorphism {auto}", l.nodes.len(), l.edges.len()));
        }
        sizes.push(format!("{u} {} nodes/{} edges", l.nodes.len(), l.edges.len()));
    }
    Verdict::of(pass, format!("{}; symmetric map is an automorphism", sizes.join(", ")), details)
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let e = Engine::builtin(Universe::Rplus).unwrap();
    let mut details = Vec::new();
    let cases = 1000;
    for _ in 0..cases {
        let s = RelationSet::from_bits(rand::Rng::gen_range(&mut rng, 0..1u16 << 14)).unwrap();
        let t = RelationSet::from_bits(rand::Rng::gen_range(&mut rng, 0..1u16 << 14)).unwrap();
        let c = e.close(s).unwrap();
        if !s.is_subset(c) || e.close(c).unwrap() != c || !c.is_subset(e.close(s | t).unwrap()) {
            details.push(format!("closure law fails at {s}, {t}"));
        }
    }
    let laws = relation_law_failures(5);
    let duals = dual_transform_failures(&Catalog::builtin().unwrap(), 4);
    let (tried, preserved) = preservation_violations(&mut rng, &WitnessCatalog::builtin().unwrap(), 200);
    let closure_bad = details.len();
    details.extend(laws.iter().take(5).cloned());
    details.extend(duals.iter().take(5).cloned());
    details.extend(preserved.iter().take(5).cloned());
    let pass = closure_bad == 0 && laws.is_empty() && duals.is_empty() && preserved.is_empty();
    Verdict::of(
        pass,
        format!(
            "closure laws on {cases} subsets ({closure_bad} failures), relation laws on orders of 1..=5 points ({}), dual transforms on 1..=4 points ({}), {tried} random formulas preserved ({} violations)",
            laws.len(),
            duals.len(),
            preserved.len()
        ),
        details,
    )
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let catalog = WitnessCatalog::builtin().unwrap();
    let mut details = Vec::new();
    let mut pairs: BTreeSet<(u16, Relation)> = BTreeSet::new();
    for w in catalog.witnesses.iter().filter(|w| w.is_sound()) {
        if let Construction::Finite(z) = &w.construction {
            if z.source.num_points() <= 3 {
                for r in w.breaks.iter() {
                    pairs.insert((w.respects.bits(), r));
                }
            }
        }
    }
    let mut found = 0;
    for &(s, r) in &pairs {
        let s = RelationSet::from_bits(s).unwrap();
        if search_witness(s, r, 3).unwrap().is_some() {
            found += 1;
        } else {
            details.push(format!("no 3-point witness for {s} against {r}"));
        }
    }
    let e = Engine::builtin(Universe::Rplus).unwrap();
    let subsets: Vec<RelationSet> = Universe::Rplus.set().subsets().collect();
    let spurious: Vec<String> = subsets
        .par_iter()
        .filter_map(|&s| {
            let bad = breakable(s, 3).unwrap() & e.close(s).unwrap();
            (!bad.is_empty()).then(|| format!("{s} has a 3-point witness breaking {bad} inside its closure"))
        })
        .collect();
    let took = start.elapsed();
    let pass = found == pairs.len() && spurious.is_empty() && took < Duration::from_secs(300);
    details.extend(spurious.iter().take(10).cloned());
    Verdict::of(
        pass,
        format!(
            "{found}/{} catalog pairs with 3-point witnesses found by search; {} of {} subsets have a search witness inside their closure; {}",
            pairs.len(),
            spurious.len(),
            subsets.len(),
            secs(took)
        ),
        details,
    )
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Verdict); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut surprises = 0;
    for (n, run) in criteria {
        if filter.is_some_and(|f| f != n) {
            continue;
        }
        let v = run();
        let word = if v.pass { "PASS" } else { "FAIL" };
        let note = if v.expected { "" } else { " [unexpected]" };
        println!("criterion {n} {word}{note}: {}", v.summary);
        for d in &v.details {
            println!("    {d}");
        }
        if !v.expected {
            surprises += 1;
        }
    }
    if surprises == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{surprises} criteria differ from their recorded outcome");
        ExitCode::FAILURE
    }
}

//! Acceptance gate: one pass/fail line per criterion. All comparisons are exact
//! (integer numerators), so no floating tolerance is involved.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_rational::Ratio;

use mvcoal::corpus::{
    boolean_playable_tables, boolean_playable_tables_brute, distinct_tables, game_forms, lifts, mutate_cell,
    random_enriched_model, random_formula, random_model, random_table, rng, PlayableSampler,
};
use mvcoal::decision::{filtration_bound, search_countermodel, soundness_suite, DecisionStatus, SearchConfig};
use mvcoal::effectivity::{
    boolean_skeleton, check_property, is_playable, is_truly_playable, lift_boolean, synthesize_game_form, EffFn,
    Property,
};
use mvcoal::filtration::{enriched_filtration, playable_filtration, FiltrationResult};
use mvcoal::game_form::effectivity_table;
use mvcoal::mv::{check_grigolia, synthesize_tau_term, Chain};
use mvcoal::semantics::{Logic, Model, Schema};
use mvcoal::syntax::{subformulas, Coalition, Formula};

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    summary: String,
    report: String,
}

impl Outcome {
    fn new(pass: bool, summary: String, report: String) -> Outcome {
        Outcome { pass, summary, report }
    }
}

fn chain(n: u32) -> Chain {
    Chain::new(n).unwrap()
}

type Q = Ratio<i64>;

fn q(x: u8, n: u8) -> Q {
    Q::new(x as i64, n as i64)
}

/// Criterion 1: MV laws, derived operations, Grigolia identities, τ-terms, n = 1..6.
fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0u64;
    let one = Q::from_integer(1);
    let zero = Q::from_integer(0);
    for n in 1..=6u32 {
        let c = chain(n);
        let nn = c.n();
        let back = |r: Q| -> u8 { (r * Q::from_integer(nn as i64)).to_integer() as u8 };
        for x in 0..=nn {
            // Oracle over rationals.
            let xr = q(x, nn);
            if c.neg(x) != back(one - xr) {
                failures.push(format!("n={n}: ¬{x}"));
            }
            if c.oplus(x, 0) != x || c.oplus(x, c.neg(0)) != c.neg(0) || c.neg(c.neg(x)) != x {
                failures.push(format!("n={n}: unit/absorption/involution at {x}"));
            }
            for y in 0..=nn {
                checked += 1;
                let yr = q(y, nn);
                let expect = [
                    (c.oplus(x, y), (xr + yr).min(one)),
                    (c.odot(x, y), (xr + yr - one).max(zero)),
                    (c.implies(x, y), (one - xr + yr).min(one)),
                    (c.iff(x, y), one - (xr - yr).max(yr - xr)),
                ];
                if expect.iter().any(|&(got, want)| got != back(want)) {
                    failures.push(format!("n={n}: operations at ({x},{y})"));
                }
                if c.oplus(x, y) != c.oplus(y, x) {
                    failures.push(format!("n={n}: commutativity at ({x},{y})"));
                }
                // ¬(¬x ⊕ y) ⊕ y = ¬(¬y ⊕ x) ⊕ x
                if c.oplus(c.neg(c.oplus(c.neg(x), y)), y) != c.oplus(c.neg(c.oplus(c.neg(y), x)), x) {
                    failures.push(format!("n={n}: Łukasiewicz axiom at ({x},{y})"));
                }
                if c.odot(x, y) != c.neg(c.oplus(c.neg(x), c.neg(y))) || c.implies(x, y) != c.oplus(c.neg(x), y) {
                    failures.push(format!("n={n}: derived operations at ({x},{y})"));
                }
                for z in 0..=nn {
                    if c.oplus(c.oplus(x, y), z) != c.oplus(x, c.oplus(y, z)) {
                        failures.push(format!("n={n}: associativity at ({x},{y},{z})"));
                    }
                }
            }
        }
        if !check_grigolia(c) {
            failures.push(format!("n={n}: Grigolia identities"));
        }
        for i in 1..=n {
            let term = synthesize_tau_term(c, i).unwrap();
            for x in 0..=nn {
                let want = if x as u32 >= i { nn } else { 0 };
                if term.eval(c, x) != want {
                    failures.push(format!("n={n}: τ_{i} at {x}"));
                }
            }
        }
    }
    let report = format!("pairs={checked} failures={failures:?}");
    Outcome::new(failures.is_empty(), format!("MV laws exact for n=1..6 ({checked} pairs)"), report)
}

/// Criterion 2: effectivity tables of small game forms are truly playable.
fn criterion_2() -> Outcome {
    let mut total = 0;
    let mut bad = Vec::new();
    for m in 2..=3 {
        let forms = game_forms(2, 2, m);
        for n in 1..=2 {
            for (g, e) in distinct_tables(&forms, chain(n)) {
                total += 1;
                if !is_truly_playable(&e) {
                    bad.push(format!("{:?}/{:?} n={n}", g.strategies(), g.outcome_map()));
                }
            }
        }
    }
    let report = format!("tables={total} failures={bad:?}");
    Outcome::new(bad.is_empty(), format!("{total} distinct game-form tables truly playable"), report)
}

/// Criterion 3: lift pipeline on every playable Boolean table, |S| ≤ 2, k = 2, n = 2.
fn criterion_3() -> Outcome {
    let n2 = chain(2);
    let mut failures = Vec::new();
    let mut report = String::new();
    let mut realized_checked = 0;
    for m in 1..=2 {
        let tables = boolean_playable_tables(2, m);
        let mut a: Vec<Vec<u8>> = tables.iter().map(|e| e.table().to_vec()).collect();
        let mut b: Vec<Vec<u8>> = boolean_playable_tables_brute(2, m).iter().map(|e| e.table().to_vec()).collect();
        a.sort();
        b.sort();
        if a != b {
            failures.push(format!("|S|={m}: generator disagrees with brute force"));
        }
        let forms: HashMap<Vec<u8>, _> = if m >= 2 {
            distinct_tables(&game_forms(2, 3, m), Chain::BOOLEAN).into_iter().map(|(g, e)| (e.table().to_vec(), g)).collect()
        } else {
            HashMap::new()
        };
        for h in &tables {
            let lifted = match lift_boolean(h, n2) {
                Ok(l) => l,
                Err(e) => {
                    failures.push(format!("lift failed: {e}"));
                    continue;
                }
            };
            if boolean_skeleton(&lifted).as_ref() != Ok(h) {
                failures.push("skeleton of lift differs".into());
            }
            if !is_playable(&lifted) {
                failures.push("lift not playable".into());
            }
            if is_truly_playable(h) && !is_truly_playable(&lifted) {
                failures.push("lift lost true playability".into());
            }
            if m >= 2 {
                match forms.get(h.table()) {
                    Some(g) => {
                        realized_checked += 1;
                        if effectivity_table(g, n2).unwrap() != lifted {
                            failures.push("lift differs from game form table".into());
                        }
                    }
                    None => failures.push("playable table without a small game form".into()),
                }
            }
        }
        let _ = write!(report, "|S|={m}: {} tables; ", tables.len());
    }
    let _ = write!(report, "game-form comparisons={realized_checked} failures={failures:?}");
    Outcome::new(failures.is_empty(), report.clone(), report)
}

/// Criterion 4: property implications over the enumerated corpus plus 500 random tables.
fn criterion_4() -> Outcome {
    let mut corpus: Vec<EffFn> = Vec::new();
    for m in 1..=2 {
        let tables = boolean_playable_tables(2, m);
        for n in 1..=3 {
            corpus.extend(lifts(&tables, chain(n)));
        }
    }
    let enumerated = corpus.len();
    let mut r = rng(SEED);
    for i in 0..500 {
        let table = if i % 2 == 0 {
            let n = rand::Rng::gen_range(&mut r, 1..=3);
            let m = rand::Rng::gen_range(&mut r, 1..=2);
            random_table(&mut r, chain(n), 2, m)
        } else {
            let base = corpus[rand::Rng::gen_range(&mut r, 0..enumerated)].clone();
            mutate_cell(&mut r, &base)
        };
        corpus.push(table);
    }
    let mut failures = Vec::new();
    let mut playable = 0;
    for (i, e) in corpus.iter().enumerate() {
        let holds = |p| check_property(e, p).holds;
        let play = holds(Property::Playable);
        playable += play as usize;
        if play && !(holds(Property::Regular) && holds(Property::CoalitionMonotonic)) {
            failures.push(format!("table {i}: playable but not regular and coalition-monotonic"));
        }
        let rhs = holds(Property::SemiPlayable)
            && holds(Property::Homogeneous)
            && holds(Property::Regular)
            && holds(Property::NMaximal);
        if play != rhs {
            failures.push(format!("table {i}: playable={play}, characterization={rhs}"));
        }
    }
    let report = format!("tables={} enumerated={enumerated} playable={playable} failures={failures:?}", corpus.len());
    Outcome::new(failures.is_empty(), format!("{} tables, {playable} playable, 0 violations required", corpus.len()), report)
}

/// Criterion 5: game form synthesis recovers tables of known forms, budget 3.
fn criterion_5() -> Outcome {
    let mut total = 0;
    let mut failures = Vec::new();
    let forms = game_forms(2, 2, 2);
    for n in 1..=2 {
        for (g, e) in distinct_tables(&forms, chain(n)) {
            total += 1;
            match synthesize_game_form(&e, 3) {
                Ok(found) if effectivity_table(&found, chain(n)).unwrap() == e => {}
                Ok(_) => failures.push(format!("{:?} n={n}: wrong table", g.outcome_map())),
                Err(err) => failures.push(format!("{:?} n={n}: {err}", g.outcome_map())),
            }
        }
    }
    let report = format!("tables={total} failures={failures:?}");
    Outcome::new(failures.is_empty() && total >= 10, format!("{total} tables synthesized within budget 3"), report)
}

/// Value agreement on every subformula of μ between each state and its class.
fn invariance(source: &Model, result: &FiltrationResult, mu: &Formula) -> Result<(), String> {
    for psi in subformulas(mu).formulas() {
        let before = source.values(psi).map_err(|e| e.to_string())?;
        let after = result.model.values(psi).map_err(|e| e.to_string())?;
        for (u, &v) in before.iter().enumerate() {
            if after[result.quotient.class_of[u]] != v {
                return Err(format!("{psi} differs at state {u}"));
            }
        }
    }
    Ok(())
}

fn filtration_criterion(enriched: bool) -> Outcome {
    let mut sampler = PlayableSampler::new();
    let mut r = rng(SEED + enriched as u64);
    let mut failures = Vec::new();
    let mut classes = 0usize;
    let mut runs = 0;
    for model_index in 0..100 {
        let n = rand::Rng::gen_range(&mut r, 1..=2);
        let m = rand::Rng::gen_range(&mut r, 1..=4);
        let model = if enriched {
            random_enriched_model(&mut sampler, &mut r, chain(n), 2, m, &[1, 2])
        } else {
            random_model(&mut sampler, &mut r, chain(n), 2, m, &[1, 2])
        };
        for _ in 0..20 {
            let depth = rand::Rng::gen_range(&mut r, 1..=4);
            let mu = random_formula(&mut r, depth, 2, &[1, 2], enriched);
            runs += 1;
            let result = if enriched { enriched_filtration(&model, &mu) } else { playable_filtration(&model, &mu) };
            let result = match result {
                Ok(res) => res,
                Err(e) => {
                    failures.push(format!("model {model_index}, {mu}: {e}"));
                    continue;
                }
            };
            classes += result.quotient.len();
            if let Err(e) = invariance(&model, &result, &mu) {
                failures.push(format!("model {model_index}, {mu}: {e}"));
            }
            if !result.model.frame.is_truly_playable() {
                failures.push(format!("model {model_index}, {mu}: filtered model not truly playable"));
            }
            if enriched && !result.model.frame.is_standard() {
                failures.push(format!("model {model_index}, {mu}: filtered model not standard"));
            }
            if result.quotient.len() as u64 > result.quotient.bound(chain(n)) {
                failures.push(format!("model {model_index}, {mu}: class count over bound"));
            }
        }
    }
    let report = format!("runs={runs} classes={classes} failures={failures:?}");
    Outcome::new(failures.is_empty(), format!("{runs} filtrations, invariance and class bound hold"), report)
}

/// Criterion 8: soundness over random playable and enriched models.
fn criterion_8() -> Outcome {
    let mut sampler = PlayableSampler::new();
    let mut r = rng(SEED + 8);
    let mut models = Vec::new();
    let mut enriched = Vec::new();
    for i in 0..300 {
        let n = rand::Rng::gen_range(&mut r, 1..=3);
        let m = rand::Rng::gen_range(&mut r, 1..=3);
        if i < 200 {
            models.push(random_model(&mut sampler, &mut r, chain(n), 2, m, &[1, 2]));
        } else {
            enriched.push(random_enriched_model(&mut sampler, &mut r, chain(n), 2, m, &[1, 2]));
        }
    }
    let formulas: Vec<Formula> = (0..4).map(|_| random_formula(&mut r, 3, 2, &[1, 2], false)).collect();
    let with_o: Vec<Formula> = (0..4).map(|_| random_formula(&mut r, 3, 2, &[1, 2], true)).collect();
    let pn = soundness_suite(Logic::Pn, &models, &formulas).unwrap();
    let tpn = soundness_suite(Logic::TPn, &enriched, &with_o).unwrap();
    let pass = pn.failures.is_empty() && tpn.failures.is_empty();
    let report = format!("Pn={} TPn={}", serde_json::to_string(&pn).unwrap(), serde_json::to_string(&tpn).unwrap());
    let summary = format!(
        "{} axiom instances and {} rule applications, {} violations",
        pn.axiom_instances + tpn.axiom_instances,
        pn.rule_applications + tpn.rule_applications,
        pn.failures.len() + tpn.failures.len()
    );
    Outcome::new(pass, summary, report)
}

/// Criterion 9: decision sanity at n = 1 with one variable.
fn criterion_9() -> Outcome {
    let c = Chain::BOOLEAN;
    let one = Coalition::from_players([1]);
    let two = Coalition::from_players([2]);
    let p = Formula::prop(1);
    let axioms = [
        ("(1)", Schema::OdotHomogeneity(one).formula(2, c)),
        ("(2)", Schema::OplusHomogeneity(one).formula(2, c)),
        ("(3)", Schema::NoForcingBottom(one).formula(2, c)),
        ("(4)", Schema::Superadditivity(one, two).formula(2, c).substitute(2, &p)),
        ("(5)", Schema::GrandMaximality.formula(2, c)),
    ];
    let mut report = String::new();
    let mut pass = true;
    let mut slowest = 0.0f64;
    for (name, phi) in axioms {
        let bound = filtration_bound(&phi, c);
        let config = SearchConfig { max_states: bound, ..Default::default() };
        let start = Instant::now();
        let verdict = search_countermodel(&phi, Logic::Pn, c, 2, &config).unwrap();
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        let ok = verdict.status == DecisionStatus::TheoremByFiltrationBound { bound } && secs < 60.0;
        pass &= ok;
        let _ = write!(report, "{name} {} bound={bound} types={}; ", verdict.status.name(), verdict.stats.types);
    }
    let phi = p.boxed(Coalition::EMPTY).implies(&p);
    let start = Instant::now();
    let verdict = search_countermodel(&phi, Logic::Pn, c, 2, &SearchConfig { max_states: 2, ..Default::default() }).unwrap();
    slowest = slowest.max(start.elapsed().as_secs_f64());
    match &verdict.status {
        DecisionStatus::CountermodelFound { model, state, value } => {
            let ok = model.frame.len() <= 2
                && model.frame.is_truly_playable()
                && model.eval(*state, &phi).unwrap().num() == *value
                && *value < c.n();
            pass &= ok;
            let _ = write!(report, "[{{}}]p -> p countermodel with {} states at {state}", model.frame.len());
        }
        other => {
            pass = false;
            let _ = write!(report, "[{{}}]p -> p: {}", other.name());
        }
    }
    pass &= slowest < 60.0;
    Outcome::new(pass, format!("{report} (slowest {slowest:.2}s)"), report)
}

fn run(f: fn() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"), String::new())
        }
    }
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, || filtration_criterion(false)),
        (7, || filtration_criterion(true)),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut all_pass = true;
    let mut reports = HashMap::new();
    for (id, f) in criteria {
        let start = Instant::now();
        let outcome = run(f);
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{status}] criterion {id}: {} [{:.1}s]", outcome.summary, start.elapsed().as_secs_f64());
        if !outcome.pass {
            println!("    {}", outcome.report);
        }
        all_pass &= outcome.pass;
        reports.insert(id, outcome.report);
    }

    let start = Instant::now();
    let mut differing = Vec::new();
    for (id, f) in criteria.into_iter().filter(|(id, _)| (4..=9).contains(id)) {
        if run(f).report != reports[&id] {
            differing.push(id);
        }
    }
    let pass = differing.is_empty();
    let status = if pass { "PASS" } else { "FAIL" };
    println!(
        "[{status}] criterion 10: reruns of criteria 4-9 {} [{:.1}s]",
        if pass { "byte-identical".to_string() } else { format!("differ for {differing:?}") },
        start.elapsed().as_secs_f64()
    );
    all_pass &= pass;

    if !all_pass {
        std::process::exit(1);
    }
}

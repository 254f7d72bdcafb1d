//! `mvcoal`: batch front end over the mvcoal library.
//!
//! Exit codes: 0 success (or the checked statement is true), 1 the statement is
//! false or a countermodel was found, 2 error or exhausted budget.

use std::fs;
use std::io::Read;
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mvcoal::decision::{search_countermodel, DecisionStatus, SearchConfig, Strategy};
use mvcoal::doc;
use mvcoal::effectivity::{
    check_property, is_playable, is_truly_playable, lift_boolean, playability_report, synthesize_game_form,
    table_cells, EffectivityError, Property,
};
use mvcoal::filtration::{enriched_filtration, intermediate_filtration, playable_filtration};
use mvcoal::game_form::effectivity_table_with_budget;
use mvcoal::mv::Chain;
use mvcoal::semantics::{Logic, Model};
use mvcoal::syntax::{parse, print, Dialect};

#[derive(Parser)]
#[command(name = "mvcoal", version, about = "Many-valued effectivity functions and coalition logics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Cap on effectivity table cells (2^k · (n+1)^|S|).
    #[arg(long, default_value_t = 1 << 20, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget_cells: u64,
    /// Wall-clock limit in seconds; 0 disables it.
    #[arg(long, default_value_t = 0, global = true)]
    time_limit: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Intermediate,
    Playable,
    Enriched,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicArg {
    Pn,
    Tpn,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Randomized,
}

#[derive(Subcommand)]
enum Command {
    /// Effectivity table of a game form.
    Effectivity {
        /// Game form document, or `-` for stdin.
        file: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Check playability properties of a table, or of every state of a model.
    Check {
        /// Effectivity, game form or model document, or `-` for stdin.
        file: String,
        /// Chain used when the input is a game form.
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Properties that must hold for exit code 0 (default: truly_playable).
        #[arg(long = "property")]
        properties: Vec<String>,
    },
    /// Evaluate a formula on a model (or on the model inside a filtration document).
    Eval {
        file: String,
        formula: String,
        /// Report only this state; exit code reflects truth there.
        #[arg(long)]
        state: Option<String>,
    },
    /// Filtrate a model through the subformulas of a formula.
    Filter {
        file: String,
        formula: String,
        #[arg(long, value_enum, default_value_t = StageArg::Playable)]
        stage: StageArg,
    },
    /// Find a game form whose effectivity table equals the given one.
    Synthesize {
        file: String,
        /// Largest number of strategies per player to try.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        budget_strategies: u32,
    },
    /// Search for a countermodel, or certify validity.
    Decide {
        formula: String,
        #[arg(long, value_enum, default_value_t = LogicArg::Pn)]
        logic: LogicArg,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        players: u32,
        /// Largest countermodel to report; at least the filtration bound certifies theorems.
        #[arg(long, default_value_t = u64::MAX, value_parser = clap::value_parser!(u64).range(1..))]
        max_states: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random models tried by the randomized strategy.
        #[arg(long, default_value_t = 1000)]
        samples: u64,
    },
    /// Lift a Boolean effectivity table to Łn.
    Lift {
        file: String,
        #[arg(long, default_value_t = 2)]
        n: u32,
    },
}

/// A failed command: message and exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// A document to print and the exit code to return.
struct Output {
    doc: Value,
    text: String,
    code: u8,
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| Failure(format!("{path}: {e}")))
    }
}

fn read_doc(path: &str) -> Result<Value, Failure> {
    Ok(doc::parse_json(&read_input(path)?)?)
}

fn chain(n: u32) -> Result<Chain, Failure> {
    Ok(Chain::new(n)?)
}

fn read_model(path: &str) -> Result<Model, Failure> {
    let value = read_doc(path)?;
    let model_doc = if doc::kind(&value) == Some("filtration") { &value["model"] } else { &value };
    Ok(doc::model_from_json(model_doc)?)
}

fn check_cells(cells: u64, budget: u64) -> Result<(), Failure> {
    if cells > budget {
        return Err(EffectivityError::BudgetExceeded { cells, budget }.into());
    }
    Ok(())
}

fn rows_text(doc: &Value) -> String {
    let mut out = String::new();
    if let Some(rows) = doc["rows"].as_object() {
        for (c, row) in rows {
            let cells: Vec<String> = row.as_array().into_iter().flatten().map(|v| v.to_string()).collect();
            out.push_str(&format!("{c}: {}\n", cells.join(" ")));
        }
    }
    out
}

fn run(command: Command, common: &Common) -> Result<Output, Failure> {
    match command {
        Command::Effectivity { file, n } => {
            let g = doc::game_form_from_json(&read_doc(&file)?)?;
            let e = effectivity_table_with_budget(&g, chain(n)?, common.budget_cells)?;
            let d = doc::effectivity_to_json(&e);
            Ok(Output { text: rows_text(&d), doc: d, code: 0 })
        }
        Command::Lift { file, n } => {
            let h = doc::effectivity_from_json(&read_doc(&file)?)?;
            let target = chain(n)?;
            check_cells(table_cells(target, h.players(), h.outcomes().len()), common.budget_cells)?;
            let e = lift_boolean(&h, target)?;
            let d = doc::effectivity_to_json(&e);
            Ok(Output { text: rows_text(&d), doc: d, code: 0 })
        }
        Command::Check { file, n, properties } => {
            let wanted: Vec<Property> = if properties.is_empty() {
                vec![Property::TrulyPlayable]
            } else {
                properties
                    .iter()
                    .map(|p| Property::from_name(p).ok_or_else(|| Failure(format!("unknown property `{p}`"))))
                    .collect::<Result<_, _>>()?
            };
            let value = read_doc(&file)?;
            let names: Vec<&str> = wanted.iter().map(|p| p.name()).collect();
            if doc::kind(&value) == Some("model") {
                let model = doc::model_from_json(&value)?;
                let frame = &model.frame;
                let mut states = serde_json::Map::new();
                let mut ok = true;
                let mut text = String::new();
                for (u, name) in frame.states().iter().enumerate() {
                    let e = frame.effectivity(u);
                    let holds = wanted.iter().all(|&p| check_property(e, p).holds);
                    ok &= holds;
                    text.push_str(&format!("{name}: {}\n", if holds { "holds" } else { "fails" }));
                    states.insert(
                        name.clone(),
                        doc::report_to_json(&playability_report(e), is_playable(e), is_truly_playable(e)),
                    );
                }
                let standard = frame.is_enriched().then(|| frame.is_standard());
                if standard == Some(false) {
                    ok = false;
                }
                if let Some(s) = standard {
                    text.push_str(&format!("standard: {s}\n"));
                }
                let d = json!({
                    "kind": "model_check",
                    "required": names,
                    "holds": ok,
                    "standard": standard,
                    "states": states,
                });
                Ok(Output { doc: d, text, code: if ok { 0 } else { 1 } })
            } else {
                let e = if doc::kind(&value) == Some("game_form") {
                    effectivity_table_with_budget(&doc::game_form_from_json(&value)?, chain(n)?, common.budget_cells)?
                } else {
                    doc::effectivity_from_json(&value)?
                };
                let report = playability_report(&e);
                let ok = wanted.iter().all(|&p| report.get(p).holds);
                let text = Property::ALL
                    .iter()
                    .map(|&p| format!("{}: {}\n", p.name(), report.get(p).holds))
                    .collect::<String>();
                let mut d = doc::report_to_json(&report, is_playable(&e), is_truly_playable(&e));
                d["required"] = json!(names);
                d["holds"] = json!(ok);
                Ok(Output { doc: d, text, code: if ok { 0 } else { 1 } })
            }
        }
        Command::Eval { file, formula, state } => {
            let model = read_model(&file)?;
            let dialect = if model.frame.is_enriched() { Dialect::LPlus } else { Dialect::L };
            let phi = parse(&formula, model.frame.players(), dialect, model.frame.chain())?;
            let values = model.values(&phi)?;
            let n = model.frame.chain().n();
            let mut d = doc::values_to_json(&model, &print(&phi), &values);
            let truth = match &state {
                Some(s) => {
                    let u = model
                        .frame
                        .states()
                        .iter()
                        .position(|x| x == s)
                        .ok_or_else(|| Failure(format!("unknown state `{s}`")))?;
                    d["state"] = json!(s);
                    values[u] == n
                }
                None => values.iter().all(|&v| v == n),
            };
            let text = match &state {
                Some(s) => format!("{}\n", d["values"][s.as_str()].as_str().unwrap_or_default()),
                None => d["values"]
                    .as_object()
                    .into_iter()
                    .flatten()
                    .map(|(s, v)| format!("{s}: {}\n", v.as_str().unwrap_or_default()))
                    .collect(),
            };
            Ok(Output { doc: d, text, code: if truth { 0 } else { 1 } })
        }
        Command::Filter { file, formula, stage } => {
            let model = read_model(&file)?;
            let dialect = if model.frame.is_enriched() { Dialect::LPlus } else { Dialect::L };
            let mu = parse(&formula, model.frame.players(), dialect, model.frame.chain())?;
            let result = match stage {
                StageArg::Intermediate => intermediate_filtration(&model, &mu)?,
                StageArg::Playable => playable_filtration(&model, &mu)?,
                StageArg::Enriched => enriched_filtration(&model, &mu)?,
            };
            let d = doc::filtration_to_json(&result, &model);
            let text = d["class_map"]
                .as_object()
                .into_iter()
                .flatten()
                .map(|(s, c)| format!("{s} -> {}\n", c.as_str().unwrap_or_default()))
                .collect();
            Ok(Output { doc: d, text, code: 0 })
        }
        Command::Synthesize { file, budget_strategies } => {
            let e = doc::effectivity_from_json(&read_doc(&file)?)?;
            let g = synthesize_game_form(&e, budget_strategies)?;
            let d = doc::game_form_to_json(&g);
            let text = format!("strategies {:?}\noutcome map {:?}\n", g.strategies(), g.outcome_map());
            Ok(Output { doc: d, text, code: 0 })
        }
        Command::Decide { formula, logic, n, players, max_states, strategy, seed, samples } => {
            let c = chain(n)?;
            let (logic, dialect, name) = match logic {
                LogicArg::Pn => (Logic::Pn, Dialect::L, "Pn"),
                LogicArg::Tpn => (Logic::TPn, Dialect::LPlus, "TPn"),
            };
            let phi = parse(&formula, players, dialect, c)?;
            let strategy = match strategy {
                StrategyArg::Exhaustive => Strategy::Exhaustive,
                StrategyArg::Randomized => Strategy::Randomized { seed, samples },
            };
            let config = SearchConfig { max_states, strategy, ..SearchConfig::default() };
            let verdict = search_countermodel(&phi, logic, c, players, &config)?;
            let d = doc::verdict_to_json(&print(&phi), name, &verdict);
            let (text, code) = match &verdict.status {
                DecisionStatus::CountermodelFound { model, state, .. } => (
                    format!(
                        "countermodel with {} states, value {} at {}\n",
                        model.frame.len(),
                        d["value"].as_str().unwrap_or_default(),
                        model.frame.states()[*state]
                    ),
                    1,
                ),
                DecisionStatus::NoCountermodelUpToBound { bound } => {
                    (format!("no countermodel with at most {bound} states\n"), 0)
                }
                DecisionStatus::TheoremByFiltrationBound { bound } => {
                    (format!("theorem (filtration bound {bound})\n"), 0)
                }
            };
            Ok(Output { doc: d, text, code })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.common.clone();
    let limit = common.time_limit;
    let (tx, rx) = mpsc::channel();
    let worker_common = common.clone();
    thread::spawn(move || {
        let _ = tx.send(run(cli.command, &worker_common));
    });
    let result = if limit == 0 {
        rx.recv().unwrap_or_else(|_| Err(Failure("command aborted".into())))
    } else {
        rx.recv_timeout(Duration::from_secs(limit))
            .unwrap_or_else(|_| Err(Failure(format!("time limit of {limit}s exceeded"))))
    };
    match result {
        Ok(out) => {
            match common.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.doc).expect("serializable")),
                Format::Text => print!("{}", out.text),
            }
            ExitCode::from(out.code)
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

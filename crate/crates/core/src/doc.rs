//! JSON documents for tables, game forms, models and results.
//!
//! Every document is an object with a `kind` field. Rows of an effectivity table are
//! keyed by coalition (`"{}"`, `"{1,2}"`) and list `E(C, f)` for every `f` in code
//! order, where `f` has code `Σ_j f(s_j)·(n+1)^j`. Values are numerators over `n`.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::decision::{DecisionStatus, DecisionVerdict};
use crate::effectivity::{EffFn, PlayabilityReport};
use crate::filtration::{FiltrationResult, Stage};
use crate::game_form::GameForm;
use crate::mv::Chain;
use crate::semantics::{Frame, Model, Valuation};
use crate::syntax::{Coalition, MAX_PLAYERS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("expected a document of kind `{expected}`, found `{found}`")]
    Kind { expected: String, found: String },
    #[error("missing or malformed field `{0}`")]
    Field(String),
    #[error("{0}")]
    Invalid(String),
}

pub fn parse_json(text: &str) -> Result<Value, DocError> {
    serde_json::from_str(text).map_err(|e| DocError::Json(e.to_string()))
}

pub fn kind(doc: &Value) -> Option<&str> {
    doc.get("kind")?.as_str()
}

fn expect_kind(doc: &Value, expected: &str) -> Result<(), DocError> {
    match kind(doc) {
        Some(found) if found == expected => Ok(()),
        found => Err(DocError::Kind { expected: expected.into(), found: found.unwrap_or("none").into() }),
    }
}

fn field<'a>(doc: &'a Value, name: &str) -> Result<&'a Value, DocError> {
    doc.get(name).ok_or_else(|| DocError::Field(name.into()))
}

fn uint(doc: &Value, name: &str) -> Result<u64, DocError> {
    field(doc, name)?.as_u64().ok_or_else(|| DocError::Field(name.into()))
}

fn strings(doc: &Value, name: &str) -> Result<Vec<String>, DocError> {
    field(doc, name)?
        .as_array()
        .and_then(|a| a.iter().map(|s| s.as_str().map(String::from)).collect())
        .ok_or_else(|| DocError::Field(name.into()))
}

fn uints(value: &Value, name: &str) -> Result<Vec<u64>, DocError> {
    value
        .as_array()
        .and_then(|a| a.iter().map(Value::as_u64).collect())
        .ok_or_else(|| DocError::Field(name.into()))
}

fn bytes(value: &Value, name: &str) -> Result<Vec<u8>, DocError> {
    uints(value, name)?
        .into_iter()
        .map(|v| u8::try_from(v).map_err(|_| DocError::Field(name.into())))
        .collect()
}

/// Parses `{}`, `{1}`, `{1,3}` (players numbered from 1), or `N` for the grand coalition.
pub fn parse_coalition(text: &str, k: u32) -> Result<Coalition, DocError> {
    let text = text.trim();
    if text == "N" {
        return Ok(Coalition::grand(k));
    }
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| DocError::Invalid(format!("bad coalition `{text}`")))?;
    let mut players = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let player: u32 = part.parse().map_err(|_| DocError::Invalid(format!("bad player `{part}`")))?;
        if player == 0 || player > k.min(MAX_PLAYERS) {
            return Err(DocError::Invalid(format!("player {player} outside 1..={k}")));
        }
        players.push(player);
    }
    Ok(Coalition::from_players(players))
}

fn rows_to_json(e: &EffFn) -> Value {
    let rows: Map<String, Value> = Coalition::all(e.players()).map(|c| (c.to_string(), json!(e.row(c)))).collect();
    Value::Object(rows)
}

fn rows_from_json(rows: &Value, chain: Chain, k: u32, outcomes: Vec<String>) -> Result<EffFn, DocError> {
    let rows = rows.as_object().ok_or_else(|| DocError::Field("rows".into()))?;
    let count = (chain.n() as usize + 1).pow(outcomes.len() as u32);
    let mut table = vec![None; count << k];
    for (key, row) in rows {
        let c = parse_coalition(key, k)?;
        let values = bytes(row, "rows")?;
        if values.len() != count {
            return Err(DocError::Invalid(format!("row {key} has {} entries, expected {count}", values.len())));
        }
        for (code, v) in values.into_iter().enumerate() {
            table[c.mask() as usize * count + code] = Some(v);
        }
    }
    let table: Vec<u8> = table
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| DocError::Invalid("every coalition needs a row".into()))?;
    EffFn::new(chain, k, outcomes, table).map_err(|e| DocError::Invalid(e.to_string()))
}

fn chain_of(doc: &Value) -> Result<Chain, DocError> {
    let n = uint(doc, "n")?;
    Chain::new(u32::try_from(n).unwrap_or(0)).map_err(|e| DocError::Invalid(e.to_string()))
}

fn players_of(doc: &Value) -> Result<u32, DocError> {
    u32::try_from(uint(doc, "players")?).map_err(|_| DocError::Field("players".into()))
}

pub fn effectivity_to_json(e: &EffFn) -> Value {
    json!({
        "kind": "effectivity",
        "n": e.chain().n(),
        "players": e.players(),
        "outcomes": e.outcomes(),
        "rows": rows_to_json(e),
    })
}

pub fn effectivity_from_json(doc: &Value) -> Result<EffFn, DocError> {
    expect_kind(doc, "effectivity")?;
    rows_from_json(field(doc, "rows")?, chain_of(doc)?, players_of(doc)?, strings(doc, "outcomes")?)
}

pub fn game_form_to_json(g: &GameForm) -> Value {
    json!({
        "kind": "game_form",
        "strategies": g.strategies(),
        "outcomes": g.outcomes(),
        "outcome_map": g.outcome_map(),
    })
}

pub fn game_form_from_json(doc: &Value) -> Result<GameForm, DocError> {
    expect_kind(doc, "game_form")?;
    let strategies = uints(field(doc, "strategies")?, "strategies")?
        .into_iter()
        .map(|s| u32::try_from(s).map_err(|_| DocError::Field("strategies".into())))
        .collect::<Result<_, _>>()?;
    let map = uints(field(doc, "outcome_map")?, "outcome_map")?.into_iter().map(|o| o as usize).collect();
    GameForm::new(strategies, strings(doc, "outcomes")?, map).map_err(|e| DocError::Invalid(e.to_string()))
}

fn prop_name(p: u32) -> String {
    format!("p{p}")
}

fn parse_prop(name: &str) -> Result<u32, DocError> {
    name.strip_prefix('p')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| DocError::Invalid(format!("bad proposition `{name}`")))
}

pub fn model_to_json(model: &Model) -> Value {
    let frame = &model.frame;
    let states = frame.states();
    let relation = frame.relation().map(|r| {
        r.iter()
            .map(|&succ| (0..states.len()).filter(|v| succ >> v & 1 == 1).map(|v| states[v].clone()).collect())
            .collect::<Vec<Vec<String>>>()
    });
    let valuation: Map<String, Value> = model.val.iter().map(|(&p, v)| (prop_name(p), json!(v))).collect();
    json!({
        "kind": "model",
        "n": frame.chain().n(),
        "players": frame.players(),
        "states": states,
        "effectivity": frame.effectivity_all().iter().map(rows_to_json).collect::<Vec<_>>(),
        "relation": relation,
        "valuation": valuation,
    })
}

pub fn model_from_json(doc: &Value) -> Result<Model, DocError> {
    expect_kind(doc, "model")?;
    let chain = chain_of(doc)?;
    let k = players_of(doc)?;
    let states = strings(doc, "states")?;
    let rows = field(doc, "effectivity")?.as_array().ok_or_else(|| DocError::Field("effectivity".into()))?;
    let tables = rows
        .iter()
        .map(|r| rows_from_json(r, chain, k, states.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let relation = match doc.get("relation") {
        None | Some(Value::Null) => None,
        Some(Value::Array(lists)) => {
            let mut out = Vec::with_capacity(lists.len());
            for list in lists {
                let names = list.as_array().ok_or_else(|| DocError::Field("relation".into()))?;
                let mut succ = 0u64;
                for name in names {
                    let name = name.as_str().ok_or_else(|| DocError::Field("relation".into()))?;
                    let v = states
                        .iter()
                        .position(|s| s == name)
                        .ok_or_else(|| DocError::Invalid(format!("unknown state `{name}`")))?;
                    succ |= 1 << v;
                }
                out.push(succ);
            }
            Some(out)
        }
        Some(_) => return Err(DocError::Field("relation".into())),
    };
    if relation.as_ref().is_some_and(|r| r.len() != states.len()) {
        return Err(DocError::Invalid("relation needs one successor list per state".into()));
    }
    let frame = Frame::new(states, tables, relation).map_err(|e| DocError::Invalid(e.to_string()))?;
    let mut val = Valuation::new();
    if let Some(entries) = doc.get("valuation") {
        let entries = entries.as_object().ok_or_else(|| DocError::Field("valuation".into()))?;
        for (name, values) in entries {
            val.insert(parse_prop(name)?, bytes(values, "valuation")?);
        }
    }
    Model::new(frame, val).map_err(|e| DocError::Invalid(e.to_string()))
}

pub fn report_to_json(report: &PlayabilityReport, playable: bool, truly_playable: bool) -> Value {
    json!({
        "kind": "playability",
        "properties": report,
        "playable": playable,
        "truly_playable": truly_playable,
    })
}

pub fn values_to_json(model: &Model, formula: &str, values: &[u8]) -> Value {
    let n = model.frame.chain();
    let by_state: BTreeMap<&str, String> = model
        .frame
        .states()
        .iter()
        .zip(values)
        .map(|(s, &v)| (s.as_str(), n.value(v as u32).expect("value in chain").to_string()))
        .collect();
    json!({
        "kind": "evaluation",
        "formula": formula,
        "values": by_state,
        "true": values.iter().all(|&v| v == n.n()),
    })
}

pub fn filtration_to_json(result: &FiltrationResult, source: &Model) -> Value {
    let states = source.frame.states();
    let classes: Vec<Vec<&str>> =
        result.quotient.classes.iter().map(|c| c.iter().map(|&u| states[u].as_str()).collect()).collect();
    let class_map: BTreeMap<&str, &str> = states
        .iter()
        .enumerate()
        .map(|(u, s)| (s.as_str(), states[result.quotient.representative(result.quotient.class_of[u])].as_str()))
        .collect();
    let stage = match result.stage {
        Stage::Intermediate => "intermediate",
        Stage::Playable => "playable",
        Stage::Enriched => "enriched",
    };
    json!({
        "kind": "filtration",
        "stage": stage,
        "generator": result.quotient.generator.to_string(),
        "classes": classes,
        "class_map": class_map,
        "bound": result.quotient.bound(source.frame.chain()),
        "model": model_to_json(&result.model),
    })
}

pub fn verdict_to_json(formula: &str, logic: &str, verdict: &DecisionVerdict) -> Value {
    let mut doc = json!({
        "kind": "verdict",
        "formula": formula,
        "logic": logic,
        "status": verdict.status.name(),
        "stats": verdict.stats,
    });
    let obj = doc.as_object_mut().expect("object literal");
    match &verdict.status {
        DecisionStatus::CountermodelFound { model, state, value } => {
            obj.insert("state".into(), json!(model.frame.states()[*state]));
            let v = model.frame.chain().value(*value as u32).expect("value in chain");
            obj.insert("value".into(), json!(v.to_string()));
            obj.insert("model".into(), model_to_json(model));
        }
        DecisionStatus::NoCountermodelUpToBound { bound } | DecisionStatus::TheoremByFiltrationBound { bound } => {
            obj.insert("bound".into(), json!(bound));
        }
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_enriched_model, rng, PlayableSampler};
    use crate::effectivity::default_outcomes;
    use crate::game_form::effectivity_table;

    #[test]
    fn effectivity_round_trip() {
        let g = GameForm::new(vec![2, 2], default_outcomes(2), vec![0, 1, 1, 0]).unwrap();
        let e = effectivity_table(&g, Chain::new(2).unwrap()).unwrap();
        let doc = effectivity_to_json(&e);
        assert_eq!(doc["rows"]["{1,2}"].as_array().unwrap().len(), 9);
        assert_eq!(effectivity_from_json(&doc).unwrap(), e);
        assert_eq!(game_form_from_json(&game_form_to_json(&g)).unwrap(), g);
        assert!(matches!(game_form_from_json(&doc), Err(DocError::Kind { .. })));
    }

    #[test]
    fn model_round_trip() {
        let mut sampler = PlayableSampler::new();
        let model = random_enriched_model(&mut sampler, &mut rng(4), Chain::new(3).unwrap(), 2, 3, &[1, 2]);
        let text = serde_json::to_string(&model_to_json(&model)).unwrap();
        assert_eq!(model_from_json(&parse_json(&text).unwrap()).unwrap(), model);
    }

    #[test]
    fn coalitions() {
        assert_eq!(parse_coalition("{}", 3).unwrap(), Coalition::EMPTY);
        assert_eq!(parse_coalition("{1, 3}", 3).unwrap(), Coalition(0b101));
        assert_eq!(parse_coalition("N", 3).unwrap(), Coalition(0b111));
        assert!(parse_coalition("{4}", 3).is_err());
        assert!(parse_coalition("1", 3).is_err());
    }
}

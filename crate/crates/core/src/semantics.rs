//! Łn-frames, models and the valuation of L / L⁺ formulas.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::effectivity::{is_playable, is_truly_playable, EffFn, EffectivityError};
use crate::mv::{Chain, TruthValue};
use crate::syntax::{ClosureNode, ClosureSet, Coalition, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("the modality [O] needs an enriched frame")]
    DialectViolation,
    #[error("proposition p{0} has no value")]
    UnknownProposition(u32),
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("malformed model: {0}")]
    Shape(String),
    #[error("{needed} valuations to check exceeds the budget of {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error(transparent)]
    Effectivity(#[from] EffectivityError),
}

/// States with one effectivity function each over the state set, optionally with
/// a relation R for [O] (an enriched frame). `relation[u]` is the successor set of u.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    chain: Chain,
    k: u32,
    states: Vec<String>,
    e: Vec<EffFn>,
    relation: Option<Vec<u64>>,
}

/// A valuation: each proposition's value vector over the states.
pub type Valuation = BTreeMap<u32, Vec<u8>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub frame: Frame,
    pub val: Valuation,
}

impl Frame {
    pub fn new(states: Vec<String>, e: Vec<EffFn>, relation: Option<Vec<u64>>) -> Result<Frame, SemanticsError> {
        let m = states.len();
        if m == 0 || m > 64 {
            return Err(SemanticsError::Shape(format!("state count {m} outside 1..=64")));
        }
        if e.len() != m {
            return Err(SemanticsError::Shape(format!("{} effectivity functions for {m} states", e.len())));
        }
        let (chain, k) = (e[0].chain(), e[0].players());
        let mut renamed = Vec::with_capacity(m);
        for table in e {
            if table.chain() != chain || table.players() != k || table.space().len() != m {
                return Err(SemanticsError::Shape("effectivity functions disagree on n, k or S".into()));
            }
            renamed.push(table.with_outcomes(states.clone())?);
        }
        if let Some(r) = &relation {
            if r.len() != m || r.iter().any(|&succ| m < 64 && succ >> m != 0) {
                return Err(SemanticsError::Shape("relation mentions unknown states".into()));
            }
        }
        Ok(Frame { chain, k, states, e: renamed, relation })
    }

    pub fn chain(&self) -> Chain {
        self.chain
    }

    pub fn players(&self) -> u32 {
        self.k
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn effectivity(&self, u: usize) -> &EffFn {
        &self.e[u]
    }

    pub fn effectivity_all(&self) -> &[EffFn] {
        &self.e
    }

    pub fn relation(&self) -> Option<&[u64]> {
        self.relation.as_deref()
    }

    pub fn is_enriched(&self) -> bool {
        self.relation.is_some()
    }

    pub fn with_relation(&self, relation: Option<Vec<u64>>) -> Result<Frame, SemanticsError> {
        Frame::new(self.states.clone(), self.e.clone(), relation)
    }

    pub fn is_playable(&self) -> bool {
        self.e.iter().all(is_playable)
    }

    pub fn is_truly_playable(&self) -> bool {
        self.e.iter().all(is_truly_playable)
    }

    /// `R = {(u,v) | E(u)(∅, ¬χ_{v}) = 0}`.
    pub fn standard_relation(&self) -> Vec<u64> {
        self.e
            .iter()
            .map(|e| {
                let space = e.space();
                (0..self.len())
                    .filter(|&v| e.get(Coalition::EMPTY, space.neg(space.characteristic(1 << v))) == 0)
                    .fold(0, |m, v| m | 1 << v)
            })
            .collect()
    }

    pub fn is_standard(&self) -> bool {
        self.relation.as_deref() == Some(&self.standard_relation()[..])
    }

    pub fn standardize(&self) -> Frame {
        Frame { relation: Some(self.standard_relation()), ..self.clone() }
    }
}

impl Model {
    pub fn new(frame: Frame, val: Valuation) -> Result<Model, SemanticsError> {
        for (p, values) in &val {
            if values.len() != frame.len() || values.iter().any(|&v| v > frame.chain.n()) {
                return Err(SemanticsError::Shape(format!("bad value vector for p{p}")));
            }
        }
        Ok(Model { frame, val })
    }

    /// Value vectors over the states for every entry of `closure`.
    pub fn evaluate_closure(&self, closure: &ClosureSet) -> Result<Vec<Vec<u8>>, SemanticsError> {
        evaluate(&self.frame, &self.val, closure)
    }

    /// `Val(−, φ)` as numerators.
    pub fn values(&self, f: &Formula) -> Result<Vec<u8>, SemanticsError> {
        let closure = ClosureSet::new(f);
        Ok(self.evaluate_closure(&closure)?.pop().expect("closure contains its generator"))
    }

    pub fn eval(&self, u: usize, f: &Formula) -> Result<TruthValue, SemanticsError> {
        if u >= self.frame.len() {
            return Err(SemanticsError::UnknownState(u));
        }
        let v = self.values(f)?[u];
        Ok(self.frame.chain.value(v as u32).expect("evaluation stays in the chain"))
    }

    pub fn is_true(&self, f: &Formula) -> Result<bool, SemanticsError> {
        let n = self.frame.chain.n();
        Ok(self.values(f)?.iter().all(|&v| v == n))
    }
}

/// Bottom-up evaluation of every subformula, children before parents.
pub fn evaluate(frame: &Frame, val: &Valuation, closure: &ClosureSet) -> Result<Vec<Vec<u8>>, SemanticsError> {
    let chain = frame.chain;
    let n = chain.n();
    let m = frame.len();
    let mut out: Vec<Vec<u8>> = Vec::with_capacity(closure.len());
    for node in closure.nodes() {
        let vector = match *node {
            ClosureNode::Top => vec![n; m],
            ClosureNode::Prop(p) => val.get(&p).ok_or(SemanticsError::UnknownProposition(p))?.clone(),
            ClosureNode::Neg(a) => out[a].iter().map(|&x| chain.neg(x)).collect(),
            ClosureNode::Implies(a, b) => out[a].iter().zip(&out[b]).map(|(&x, &y)| chain.implies(x, y)).collect(),
            ClosureNode::Box(c, a) => {
                let code = frame.e[0].space().encode(&out[a]);
                frame.e.iter().map(|e| e.get(c, code)).collect()
            }
            ClosureNode::BoxO(a) => {
                let relation = frame.relation.as_ref().ok_or(SemanticsError::DialectViolation)?;
                relation
                    .iter()
                    .map(|&succ| (0..m).filter(|v| succ >> v & 1 == 1).map(|v| out[a][v]).min().unwrap_or(n))
                    .collect()
            }
        };
        out.push(vector);
    }
    Ok(out)
}

/// A valuation and state at which a formula takes a value below 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub valuation: Valuation,
    pub state: usize,
    pub value: u8,
}

/// Default cap on the number of valuations tried by validity checks.
pub const DEFAULT_VALUATION_BUDGET: u64 = 1 << 22;

/// Tries every valuation of `props` on the frame; returns the first falsifying one.
pub fn find_falsifying_valuation(
    frame: &Frame,
    f: &Formula,
    props: &[u32],
    budget: u64,
) -> Result<Option<Counterexample>, SemanticsError> {
    let m = frame.len();
    let n = frame.chain.n();
    let slots = (props.len() * m) as u32;
    let needed = (n as u64 + 1).checked_pow(slots).unwrap_or(u64::MAX);
    if needed > budget {
        return Err(SemanticsError::BudgetExceeded { needed, budget });
    }
    let closure = ClosureSet::new(f);
    let mut val: Valuation = props.iter().map(|&p| (p, vec![0; m])).collect();
    loop {
        let values = evaluate(frame, &val, &closure)?;
        if let Some(state) = values[closure.root()].iter().position(|&v| v < n) {
            let value = values[closure.root()][state];
            return Ok(Some(Counterexample { valuation: val, state, value }));
        }
        // Odometer over all value slots.
        let mut carried = true;
        for vector in val.values_mut() {
            for slot in vector.iter_mut() {
                if *slot < n {
                    *slot += 1;
                    carried = false;
                    break;
                }
                *slot = 0;
            }
            if !carried {
                break;
            }
        }
        if carried {
            return Ok(None);
        }
    }
}

pub fn is_valid(frame: &Frame, f: &Formula, props: &[u32], budget: u64) -> Result<bool, SemanticsError> {
    Ok(find_falsifying_valuation(frame, f, props, budget)?.is_none())
}

/// Axiom schemata of Pn and TPn, with schema variables p = p1, q = p2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Schema {
    /// `[C](p ⊙ p) ↔ [C]p ⊙ [C]p`
    OdotHomogeneity(Coalition),
    /// `[C](p ⊕ p) ↔ [C]p ⊕ [C]p`
    OplusHomogeneity(Coalition),
    /// `¬[C]0`
    NoForcingBottom(Coalition),
    /// `([C]p ∧ [C']q) → [C ∪ C'](p ∧ q)` for disjoint C, C'
    Superadditivity(Coalition, Coalition),
    /// `[∅]p → ¬[N]¬p`
    GrandMaximality,
    /// `[C]τ_{i/n}(p) ↔ τ_{i/n}([C]p)`
    Threshold(Coalition, u32),
    /// `[O]1`
    OutcomeTop,
    /// `[O]p ↔ [∅]p`
    OutcomeEmpty,
    /// `[∅](p → q) → ([∅]p → [∅]q)`
    EmptyDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Logic {
    Pn,
    TPn,
}

impl Schema {
    pub fn formula(&self, k: u32, chain: Chain) -> Formula {
        let p = Formula::prop(1);
        let q = Formula::prop(2);
        let empty = Coalition::EMPTY;
        match *self {
            Schema::OdotHomogeneity(c) => p.odot(&p).boxed(c).iff(&p.boxed(c).odot(&p.boxed(c))),
            Schema::OplusHomogeneity(c) => p.oplus(&p).boxed(c).iff(&p.boxed(c).oplus(&p.boxed(c))),
            Schema::NoForcingBottom(c) => Formula::bottom().boxed(c).neg(),
            Schema::Superadditivity(c, d) => p.boxed(c).and(&q.boxed(d)).implies(&p.and(&q).boxed(c.union(d))),
            Schema::GrandMaximality => p.boxed(empty).implies(&p.neg().boxed(Coalition::grand(k)).neg()),
            Schema::Threshold(c, i) => {
                let tau = |f: &Formula| f.tau(chain, i).expect("threshold index in range");
                tau(&p).boxed(c).iff(&tau(&p.boxed(c)))
            }
            Schema::OutcomeTop => Formula::top().box_o(),
            Schema::OutcomeEmpty => p.box_o().iff(&p.boxed(empty)),
            Schema::EmptyDistribution => {
                p.implies(&q).boxed(empty).implies(&p.boxed(empty).implies(&q.boxed(empty)))
            }
        }
    }

    pub fn variables(&self) -> &'static [u32] {
        match self {
            Schema::Superadditivity(..) | Schema::EmptyDistribution => &[1, 2],
            Schema::NoForcingBottom(_) | Schema::OutcomeTop => &[],
            _ => &[1],
        }
    }

    /// Every instance over k players: axioms (1)–(5) and the threshold family for Pn,
    /// additionally (6)–(8) for TPn.
    pub fn instances(logic: Logic, k: u32, chain: Chain) -> Vec<Schema> {
        let mut out = Vec::new();
        for c in Coalition::all(k) {
            out.push(Schema::OdotHomogeneity(c));
            out.push(Schema::OplusHomogeneity(c));
            out.push(Schema::NoForcingBottom(c));
            for d in Coalition::all(k).filter(|d| d.is_disjoint(c)) {
                out.push(Schema::Superadditivity(c, d));
            }
            for i in 1..=chain.n() as u32 {
                out.push(Schema::Threshold(c, i));
            }
        }
        out.push(Schema::GrandMaximality);
        if logic == Logic::TPn {
            out.extend([Schema::OutcomeTop, Schema::OutcomeEmpty, Schema::EmptyDistribution]);
        }
        out
    }
}

/// Validity of one schema instance on a frame, schema variables ranging over all valuations.
pub fn check_axiom_schema(frame: &Frame, schema: Schema) -> Result<Option<Counterexample>, SemanticsError> {
    let f = schema.formula(frame.k, frame.chain);
    find_falsifying_valuation(frame, &f, schema.variables(), u64::MAX)
}

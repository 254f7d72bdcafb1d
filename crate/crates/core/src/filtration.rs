//! Filtration of a finite model through the subformulas of a formula μ.
//!
//! States are identified when they agree on every subformula of μ. Each class
//! is represented by its lowest-index member, and the quotient's effectivity
//! functions and relation are read off the representatives, consulting only
//! value vectors that are definable from the subformulas of μ.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::effectivity::{
    boolean_skeleton, check_property, lift_unchecked, EffFn, EffectivityError, FnSpace, Property, DEFAULT_CELL_BUDGET,
};
use crate::mv::Chain;
use crate::semantics::{find_falsifying_valuation, Frame, Model, SemanticsError};
use crate::syntax::{ClosureNode, ClosureSet, Coalition, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiltrationError {
    #[error("the model is not playable")]
    NotPlayable,
    #[error("the enriched model is not standard")]
    NotStandard,
    #[error("the model is not enriched, but the formula uses [O]")]
    NotEnriched,
    #[error("the [O]-homogeneity premise fails on the model")]
    PremiseViolated,
    #[error("filtration invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Effectivity(#[from] EffectivityError),
}

/// The partition of the states by their values on the subformulas of μ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub generator: Formula,
    /// Classes in order of their lowest member; each list is sorted.
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    /// Number of distinct subformulas of μ.
    pub subformula_count: usize,
}

impl Quotient {
    pub fn representative(&self, class: usize) -> usize {
        self.classes[class][0]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `(n+1)^{#subformulas(μ)}`, saturating.
    pub fn bound(&self, chain: Chain) -> u64 {
        (chain.size() as u64).checked_pow(self.subformula_count as u32).unwrap_or(u64::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Intermediate,
    Playable,
    Enriched,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiltrationResult {
    pub quotient: Quotient,
    pub model: Model,
    pub stage: Stage,
}

pub fn quotient(m: &Model, mu: &Formula) -> Result<Quotient, FiltrationError> {
    let closure = ClosureSet::new(mu);
    let values = m.evaluate_closure(&closure)?;
    Ok(partition(m.frame.len(), &closure, &values, mu))
}

fn partition(states: usize, closure: &ClosureSet, values: &[Vec<u8>], mu: &Formula) -> Quotient {
    let mut by_key: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = Vec::with_capacity(states);
    for u in 0..states {
        let key: Vec<u8> = values.iter().map(|v| v[u]).collect();
        let class = *by_key.entry(key).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[class].push(u);
        class_of.push(class);
    }
    Quotient { generator: mu.clone(), classes, class_of, subformula_count: closure.len() }
}

/// Shared state of one filtration run.
struct Run<'a> {
    m: &'a Model,
    closure: ClosureSet,
    values: Vec<Vec<u8>>,
    q: Quotient,
    /// Function space over the classes.
    space: FnSpace,
    /// Definable vectors over the classes (codes in `space`).
    definable: Vec<usize>,
}

impl<'a> Run<'a> {
    fn new(m: &'a Model, mu: &Formula) -> Result<Run<'a>, FiltrationError> {
        let closure = ClosureSet::new(mu);
        let values = m.evaluate_closure(&closure)?;
        let q = partition(m.frame.len(), &closure, &values, mu);
        let chain = m.frame.chain();
        let space = FnSpace::new(chain, q.len(), DEFAULT_CELL_BUDGET)?;
        let mut run = Run { m, closure, values, q, space, definable: Vec::new() };
        run.definable = run.definable_closure();
        Ok(run)
    }

    fn chain(&self) -> Chain {
        self.m.frame.chain()
    }

    /// A value vector over the states, read on the classes (it is class-constant).
    fn to_classes(&self, vector: &[u8]) -> usize {
        let f: Vec<u8> = (0..self.q.len()).map(|c| vector[self.q.representative(c)]).collect();
        self.space.encode(&f)
    }

    /// A vector over the classes, pulled back to the states, as a code of the original space.
    fn to_states(&self, code: usize) -> usize {
        let states = self.m.frame.effectivity(0).space();
        let f: Vec<u8> = self.q.class_of.iter().map(|&c| self.space.digit(code, c)).collect();
        states.encode(&f)
    }

    /// Subformula vectors closed under pointwise ¬, →, τ⊕, τ⊙ (a finite fixpoint).
    fn definable_closure(&self) -> Vec<usize> {
        let chain = self.chain();
        let space = &self.space;
        let mut member = vec![false; space.count()];
        let mut list = Vec::new();
        let push = |code: usize, member: &mut Vec<bool>, list: &mut Vec<usize>| {
            if !member[code] {
                member[code] = true;
                list.push(code);
            }
        };
        for v in &self.values {
            push(self.to_classes(v), &mut member, &mut list);
        }
        push(0, &mut member, &mut list);
        push(space.top(), &mut member, &mut list);
        let mut next = 0;
        while next < list.len() {
            let a = list[next];
            next += 1;
            push(space.neg(a), &mut member, &mut list);
            push(space.map(a, |x| chain.tau_oplus(x)), &mut member, &mut list);
            push(space.map(a, |x| chain.tau_odot(x)), &mut member, &mut list);
            for i in 0..next {
                let b = list[i];
                push(space.zip(a, b, |x, y| chain.implies(x, y)), &mut member, &mut list);
                push(space.zip(b, a, |x, y| chain.implies(x, y)), &mut member, &mut list);
            }
        }
        list.sort_unstable();
        list
    }

    /// `E*(|u|)(C, f) = max{E(rep)(C, v) | v definable, v ≤ f}` for C ≠ N (empty max = 0),
    /// and `E*(|u|)(N, f) = ¬E*(|u|)(∅, ¬f)`.
    fn intermediate_tables(&self) -> Result<Vec<EffFn>, FiltrationError> {
        let chain = self.chain();
        let k = self.m.frame.players();
        let grand = Coalition::grand(k);
        let names = self.class_names();
        let pulled: Vec<usize> = self.definable.iter().map(|&v| self.to_states(v)).collect();
        let mut tables = Vec::with_capacity(self.q.len());
        for class in 0..self.q.len() {
            let e = self.m.frame.effectivity(self.q.representative(class));
            let below = |c: Coalition, f: usize| {
                self.definable
                    .iter()
                    .zip(&pulled)
                    .filter(|(&v, _)| self.space.leq(v, f))
                    .map(|(_, &p)| e.get(c, p))
                    .max()
                    .unwrap_or(0)
            };
            let empty_row: Vec<u8> = self.space.codes().map(|f| below(Coalition::EMPTY, f)).collect();
            let table = EffFn::from_fn(chain, k, names.clone(), DEFAULT_CELL_BUDGET, |c, f| {
                if c == grand {
                    chain.neg(empty_row[self.space.neg(f)])
                } else if c == Coalition::EMPTY {
                    empty_row[f]
                } else {
                    below(c, f)
                }
            })?;
            tables.push(table);
        }
        Ok(tables)
    }

    fn class_names(&self) -> Vec<String> {
        let states = self.m.frame.states();
        (0..self.q.len()).map(|c| states[self.q.representative(c)].clone()).collect()
    }

    /// Val*(|u|, p) = Val(rep, p) for the propositions of μ.
    fn filtered_valuation(&self) -> BTreeMap<u32, Vec<u8>> {
        self.q
            .generator
            .props()
            .into_iter()
            .map(|p| {
                let v = &self.m.val[&p];
                (p, (0..self.q.len()).map(|c| v[self.q.representative(c)]).collect())
            })
            .collect()
    }

    /// Enriched relation: |v| ∈ R*(|u|) iff every definable w equal to 1 on R(rep_u) has w(v) = 1.
    fn enriched_relation(&self) -> Vec<u64> {
        let relation = self.m.frame.relation().expect("checked enriched");
        let n = self.chain().n();
        (0..self.q.len())
            .map(|class| {
                let succ = relation[self.q.representative(class)];
                let forced: Vec<usize> = self
                    .definable
                    .iter()
                    .copied()
                    .filter(|&w| {
                        (0..self.m.frame.len())
                            .filter(|v| succ >> v & 1 == 1)
                            .all(|v| self.space.digit(w, self.q.class_of[v]) == n)
                    })
                    .collect();
                (0..self.q.len())
                    .filter(|&target| forced.iter().all(|&w| self.space.digit(w, target) == n))
                    .fold(0, |m, t| m | 1 << t)
            })
            .collect()
    }

    fn check(&self, condition: bool, what: &str) -> Result<(), FiltrationError> {
        if condition {
            Ok(())
        } else {
            Err(FiltrationError::InvariantViolated(what.to_string()))
        }
    }

    /// Truth transfer: every subformula of μ has the same value at u and at |u|.
    fn check_truth_transfer(&self, filtered: &Model) -> Result<(), FiltrationError> {
        let after = filtered.evaluate_closure(&self.closure)?;
        for (i, (before, after)) in self.values.iter().zip(&after).enumerate() {
            for (u, &value) in before.iter().enumerate() {
                if after[self.q.class_of[u]] != value {
                    return Err(FiltrationError::InvariantViolated(format!(
                        "truth transfer fails for {} at state {u}",
                        self.closure.formulas()[i]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Agreement of the filtered effectivity with the original on every `[C]ψ` subformula.
    fn check_box_agreement(&self, tables: &[EffFn]) -> Result<(), FiltrationError> {
        for node in self.closure.nodes() {
            if let ClosureNode::Box(c, a) = *node {
                let original = self.m.frame.effectivity(0).space().encode(&self.values[a]);
                let reduced = self.to_classes(&self.values[a]);
                for u in 0..self.m.frame.len() {
                    let expected = self.m.frame.effectivity(u).get(c, original);
                    self.check(tables[self.q.class_of[u]].get(c, reduced) == expected, "effectivity agreement on [C]ψ")?;
                }
            }
        }
        Ok(())
    }

    fn check_common(&self, model: &Model) -> Result<(), FiltrationError> {
        self.check(
            (self.q.len() as u64) <= self.q.bound(self.chain()),
            "class count within (n+1)^{#subformulas}",
        )?;
        for (p, v) in &model.val {
            for u in 0..self.m.frame.len() {
                self.check(v[self.q.class_of[u]] == self.m.val[p][u], "valuation agreement")?;
            }
        }
        self.check_truth_transfer(model)
    }
}

fn require_playable(m: &Model) -> Result<(), FiltrationError> {
    if m.frame.is_playable() {
        Ok(())
    } else {
        Err(FiltrationError::NotPlayable)
    }
}

/// The intermediate filtration: E* read from definable vectors below f.
pub fn intermediate_filtration(m: &Model, mu: &Formula) -> Result<FiltrationResult, FiltrationError> {
    require_playable(m)?;
    if mu.mentions_box_o() {
        return Err(FiltrationError::NotEnriched);
    }
    let run = Run::new(m, mu)?;
    let tables = run.intermediate_tables()?;
    run.check_box_agreement(&tables)?;
    for e in &tables {
        let skeleton = boolean_skeleton(e).map_err(|_| FiltrationError::InvariantViolated("E* skeleton is Boolean".into()))?;
        run.check(check_property(&skeleton, Property::Playable).holds, "E* skeleton is playable")?;
    }
    let frame = Frame::new(run.class_names(), tables, None)?;
    let model = Model::new(frame, run.filtered_valuation())?;
    run.check_common(&model)?;
    Ok(FiltrationResult { quotient: run.q.clone(), model, stage: Stage::Intermediate })
}

fn playable_tables(run: &Run<'_>) -> Result<Vec<EffFn>, FiltrationError> {
    let mut out = Vec::new();
    for e in run.intermediate_tables()? {
        let skeleton = boolean_skeleton(&e).map_err(|_| FiltrationError::InvariantViolated("E* skeleton is Boolean".into()))?;
        run.check(check_property(&skeleton, Property::Playable).holds, "E* skeleton is playable")?;
        let lifted = lift_unchecked(&skeleton, run.chain(), DEFAULT_CELL_BUDGET)?;
        run.check(check_property(&lifted, Property::TrulyPlayable).holds, "E⁺ is truly playable")?;
        out.push(lifted);
    }
    run.check_box_agreement(&out)?;
    Ok(out)
}

/// The playable filtration: E⁺ is the lift of the skeleton of E*.
pub fn playable_filtration(m: &Model, mu: &Formula) -> Result<FiltrationResult, FiltrationError> {
    require_playable(m)?;
    if mu.mentions_box_o() {
        return Err(FiltrationError::NotEnriched);
    }
    let run = Run::new(m, mu)?;
    let tables = playable_tables(&run)?;
    let frame = Frame::new(run.class_names(), tables, None)?;
    let model = Model::new(frame, run.filtered_valuation())?;
    run.check_common(&model)?;
    Ok(FiltrationResult { quotient: run.q.clone(), model, stage: Stage::Playable })
}

/// `[O](p ⊕ p) ↔ [O]p ⊕ [O]p` and its ⊙ twin, valid on the frame.
pub fn box_o_homogeneous(frame: &Frame) -> Result<bool, FiltrationError> {
    let p = Formula::prop(1);
    for f in [
        p.oplus(&p).box_o().iff(&p.box_o().oplus(&p.box_o())),
        p.odot(&p).box_o().iff(&p.box_o().odot(&p.box_o())),
    ] {
        if find_falsifying_valuation(frame, &f, &[1], u64::MAX)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The enriched filtration of a standard truly playable model.
pub fn enriched_filtration(m: &Model, mu: &Formula) -> Result<FiltrationResult, FiltrationError> {
    if !m.frame.is_enriched() {
        return Err(FiltrationError::NotEnriched);
    }
    if !m.frame.is_standard() {
        return Err(FiltrationError::NotStandard);
    }
    if !m.frame.is_truly_playable() {
        return Err(FiltrationError::NotPlayable);
    }
    if !box_o_homogeneous(&m.frame)? {
        return Err(FiltrationError::PremiseViolated);
    }
    let run = Run::new(m, mu)?;
    let tables = playable_tables(&run)?;
    let relation = run.enriched_relation();
    let frame = Frame::new(run.class_names(), tables, Some(relation.clone()))?;
    run.check(frame.is_standard(), "filtered enriched frame is standard")?;

    let original = m.frame.relation().expect("checked enriched");
    let n = run.chain().n();
    for class in 0..run.q.len() {
        let rep = run.q.representative(class);
        for v in (0..m.frame.len()).filter(|v| original[rep] >> v & 1 == 1) {
            run.check(relation[class] >> run.q.class_of[v] & 1 == 1, "R-successors of representatives survive")?;
        }
    }
    for (outer, node) in run.closure.nodes().iter().enumerate() {
        if let ClosureNode::BoxO(a) = *node {
            for u in 0..m.frame.len() {
                if run.values[outer][u] != n {
                    continue;
                }
                for v in 0..m.frame.len() {
                    if relation[run.q.class_of[u]] >> run.q.class_of[v] & 1 == 1 {
                        run.check(run.values[a][v] == n, "R* respects [O]ψ subformulas")?;
                    }
                }
            }
        }
    }
    let model = Model::new(frame, run.filtered_valuation())?;
    run.check_common(&model)?;
    Ok(FiltrationResult { quotient: run.q.clone(), model, stage: Stage::Enriched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effectivity::default_outcomes;
    use crate::game_form::{effectivity_table, GameForm};
    use crate::syntax::{parse, Dialect};

    fn l(n: u32) -> Chain {
        Chain::new(n).unwrap()
    }

    /// Three states, each carrying the effectivity of a fixed 2x2 form over them.
    fn three_state_model(n: u32, p: Vec<u8>) -> Model {
        let forms = [vec![0, 1, 1, 2], vec![2, 2, 2, 2], vec![0, 0, 1, 1]];
        let e = forms
            .iter()
            .map(|o| effectivity_table(&GameForm::new(vec![2, 2], default_outcomes(3), o.clone()).unwrap(), l(n)).unwrap())
            .collect();
        let frame = Frame::new(vec!["a".into(), "b".into(), "c".into()], e, None).unwrap();
        Model::new(frame, BTreeMap::from([(1, p)])).unwrap()
    }

    #[test]
    fn quotient_examples() {
        let m = three_state_model(2, vec![0, 1, 1]);
        assert_eq!(quotient(&m, &Formula::top()).unwrap().classes, vec![vec![0, 1, 2]]);
        let q = quotient(&m, &Formula::prop(1)).unwrap();
        assert_eq!(q.classes, vec![vec![0], vec![1, 2]]);
        assert_eq!(q.class_of, vec![0, 1, 1]);
        assert_eq!(q.bound(l(2)), 3);
    }

    #[test]
    fn intermediate_has_dual_grand_row() {
        let m = three_state_model(2, vec![0, 1, 2]);
        let r = intermediate_filtration(&m, &parse("[{1}]p1", 2, Dialect::L, l(2)).unwrap()).unwrap();
        for e in r.model.frame.effectivity_all() {
            let space = e.space();
            for f in space.codes() {
                assert_eq!(e.get(Coalition::grand(2), f), 2 - e.get(Coalition::EMPTY, space.neg(f)));
            }
        }
    }

    #[test]
    fn playable_filtration_preserves_values() {
        let mu = parse("[{1}]p1 -> [{}](p1 (+) [N]~p1)", 2, Dialect::L, l(2)).unwrap();
        let m = three_state_model(2, vec![0, 1, 2]);
        let r = playable_filtration(&m, &mu).unwrap();
        assert!(r.model.frame.is_truly_playable());
        let before = m.values(&mu).unwrap();
        let after = r.model.values(&mu).unwrap();
        for u in 0..3 {
            assert_eq!(after[r.quotient.class_of[u]], before[u]);
        }
    }

    #[test]
    fn single_class_quotient() {
        let m = three_state_model(1, vec![1, 1, 1]);
        let r = playable_filtration(&m, &Formula::prop(1)).unwrap();
        assert_eq!(r.quotient.len(), 1);
        assert!(r.model.frame.is_truly_playable());
    }

    #[test]
    fn enriched_filtration_examples() {
        let m = three_state_model(2, vec![0, 1, 2]);
        let std = Model::new(m.frame.standardize(), m.val.clone()).unwrap();
        let mu = parse("[O]p1 -> [{2}]p1", 2, Dialect::LPlus, l(2)).unwrap();
        let r = enriched_filtration(&std, &mu).unwrap();
        assert!(r.model.frame.is_standard());
        assert_eq!(
            enriched_filtration(&m, &mu),
            Err(FiltrationError::NotEnriched)
        );
        let skewed = Model::new(m.frame.with_relation(Some(vec![0, 0, 0])).unwrap(), m.val.clone()).unwrap();
        assert_eq!(enriched_filtration(&skewed, &mu), Err(FiltrationError::NotStandard));
        assert_eq!(playable_filtration(&std, &mu), Err(FiltrationError::NotEnriched));
    }

    #[test]
    fn non_playable_models_are_rejected() {
        let e = EffFn::from_fn(l(1), 2, default_outcomes(2), DEFAULT_CELL_BUDGET, |_, _| 1).unwrap();
        let frame = Frame::new(vec!["a".into(), "b".into()], vec![e.clone(), e], None).unwrap();
        let m = Model::new(frame, BTreeMap::from([(1, vec![0, 1])])).unwrap();
        assert_eq!(playable_filtration(&m, &Formula::prop(1)), Err(FiltrationError::NotPlayable));
    }
}

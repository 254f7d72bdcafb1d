//! Countermodel search and validity checking for Pn and TPn.
//!
//! Two engines cooperate. Small models are enumerated explicitly (every playable
//! table at every state, every valuation). Beyond that, validity is decided by type
//! elimination: a type fixes a value for each proposition and modal subformula, and
//! types that cannot be realized by a playable effectivity function over the
//! surviving types are removed until a fixpoint is reached. A formula is valid in
//! all finite (standard, enriched) playable models iff every surviving type gives it
//! value 1; otherwise the surviving types themselves form a countermodel.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{rng, state_names, PlayableSampler};
use crate::effectivity::{default_outcomes, lift_unchecked, table_cells, EffFn, EffectivityError, DEFAULT_CELL_BUDGET};
use crate::mv::Chain;
use crate::semantics::{
    check_axiom_schema, evaluate, find_falsifying_valuation, Frame, Logic, Model, Schema, SemanticsError, Valuation,
};
use crate::syntax::{ClosureNode, ClosureSet, Coalition, Dialect, Formula, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecisionError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Effectivity(#[from] EffectivityError),
    #[error("internal check failed: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Strategy {
    Exhaustive,
    Randomized { seed: u64, samples: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest countermodel (in states) that may be reported; also the bar for
    /// declaring a theorem, which needs `max_states` at least the filtration bound.
    pub max_states: u64,
    pub strategy: Strategy,
    /// Cap on frame-and-valuation pairs tried by explicit enumeration.
    pub explicit_budget: u64,
    /// Cap on the number of types in type elimination.
    pub type_budget: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_states: 8, strategy: Strategy::Exhaustive, explicit_budget: 1 << 18, type_budget: 1 << 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionStatus {
    CountermodelFound { model: Model, state: usize, value: u8 },
    NoCountermodelUpToBound { bound: u64 },
    TheoremByFiltrationBound { bound: u64 },
}

impl DecisionStatus {
    pub fn name(&self) -> &'static str {
        match self {
            DecisionStatus::CountermodelFound { .. } => "countermodel_found",
            DecisionStatus::NoCountermodelUpToBound { .. } => "no_countermodel_up_to_bound",
            DecisionStatus::TheoremByFiltrationBound { .. } => "theorem_by_filtration_bound",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Every model with at most this many states was enumerated explicitly.
    pub explicit_states: u64,
    pub explicit_models: u64,
    pub random_samples: u64,
    /// `valid`, `invalid`, `skipped` or `not_run`.
    pub type_elimination: String,
    pub types: u64,
    pub surviving_types: u64,
    pub rounds: u32,
    pub filtration_bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionVerdict {
    pub status: DecisionStatus,
    pub stats: SearchStats,
}

/// `(n+1)^{|sub(φ)|}`, saturating.
pub fn filtration_bound(phi: &Formula, chain: Chain) -> u64 {
    let len = ClosureSet::new(phi).len() as u32;
    (chain.n() as u64 + 1).checked_pow(len).unwrap_or(u64::MAX)
}

fn check_input(phi: &Formula, logic: Logic, k: u32) -> Result<(), DecisionError> {
    let dialect = if logic == Logic::TPn { Dialect::LPlus } else { Dialect::L };
    phi.check(k, dialect)?;
    Ok(())
}

fn frame_for(logic: Logic, frame: Frame) -> Frame {
    if logic == Logic::TPn { frame.standardize() } else { frame }
}

/// Searches for a finite model of the logic's frame class falsifying `phi`.
pub fn search_countermodel(
    phi: &Formula,
    logic: Logic,
    chain: Chain,
    k: u32,
    config: &SearchConfig,
) -> Result<DecisionVerdict, DecisionError> {
    check_input(phi, logic, k)?;
    let bound = filtration_bound(phi, chain);
    let mut stats = SearchStats { type_elimination: "not_run".into(), filtration_bound: bound, ..Default::default() };

    if let Strategy::Randomized { seed, samples } = config.strategy {
        let found = random_search(phi, logic, chain, k, config.max_states, seed, samples, &mut stats)?;
        let status = match found {
            Some((model, state, value)) => DecisionStatus::CountermodelFound { model, state, value },
            None => DecisionStatus::NoCountermodelUpToBound { bound: 0 },
        };
        return Ok(DecisionVerdict { status, stats });
    }

    if let Some((model, state, value)) = explicit_search(phi, logic, chain, k, config, &mut stats)? {
        return Ok(DecisionVerdict { status: DecisionStatus::CountermodelFound { model, state, value }, stats });
    }

    let explicit_bound = stats.explicit_states;
    let status = match TypeSpace::new(phi, logic, chain, k, config.type_budget) {
        None => {
            stats.type_elimination = "skipped".into();
            stats.types = type_count(phi, chain);
            DecisionStatus::NoCountermodelUpToBound { bound: explicit_bound }
        }
        Some(space) => {
            stats.types = space.types as u64;
            let (surviving, rounds) = space.fixpoint((0..space.types).collect());
            stats.rounds = rounds;
            stats.surviving_types = surviving.len() as u64;
            if surviving.iter().all(|&t| space.value(t, space.closure.root()) == chain.n()) {
                stats.type_elimination = "valid".into();
                if config.max_states >= bound {
                    DecisionStatus::TheoremByFiltrationBound { bound }
                } else {
                    DecisionStatus::NoCountermodelUpToBound { bound: config.max_states.max(explicit_bound) }
                }
            } else {
                stats.type_elimination = "invalid".into();
                let states = space.minimize(surviving);
                if (states.len() as u64) <= config.max_states.min(64)
                    && table_cells(chain, k, states.len()) <= DEFAULT_CELL_BUDGET
                {
                    let (model, state, value) = space.countermodel(&states)?;
                    DecisionStatus::CountermodelFound { model, state, value }
                } else {
                    DecisionStatus::NoCountermodelUpToBound { bound: explicit_bound }
                }
            }
        }
    };
    Ok(DecisionVerdict { status, stats })
}

fn type_count(phi: &Formula, chain: Chain) -> u64 {
    let closure = ClosureSet::new(phi);
    let atoms = closure.nodes().iter().filter(|node| is_atom(node)).count() as u32;
    (chain.n() as u64 + 1).checked_pow(atoms).unwrap_or(u64::MAX)
}

fn is_atom(node: &ClosureNode) -> bool {
    matches!(node, ClosureNode::Prop(_) | ClosureNode::Box(..) | ClosureNode::BoxO(_))
}

/// Upper bound on the number of candidate Boolean tables the exhaustive generator examines.
fn generator_cost(k: u32, m: usize) -> u64 {
    let per_coalition: u64 = match m {
        1 => 1,
        2 => 5,
        3 => 19,
        _ => return u64::MAX,
    };
    per_coalition.checked_pow((1u32 << k) - 2).map_or(u64::MAX, |c| c.saturating_mul((1 << m) - 1))
}

fn explicit_search(
    phi: &Formula,
    logic: Logic,
    chain: Chain,
    k: u32,
    config: &SearchConfig,
    stats: &mut SearchStats,
) -> Result<Option<(Model, usize, u8)>, DecisionError> {
    let props: Vec<u32> = phi.props().into_iter().collect();
    let mut sampler = PlayableSampler::new();
    let mut spent = 0u64;
    for m in 1..=config.max_states.min(3) as usize {
        if generator_cost(k, m) > 1 << 20 {
            break;
        }
        let tables = sampler.all(chain, k, m).to_vec();
        let frames = (tables.len() as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
        let valuations = (chain.n() as u64 + 1).checked_pow((m * props.len()) as u32).unwrap_or(u64::MAX);
        let cost = frames.saturating_mul(valuations);
        if spent.saturating_add(cost) > config.explicit_budget {
            break;
        }
        spent += cost;
        let mut choice = vec![0usize; m];
        loop {
            let e = choice.iter().map(|&i| tables[i].clone()).collect();
            let frame = frame_for(logic, Frame::new(state_names(m), e, None)?);
            if let Some(cx) = find_falsifying_valuation(&frame, phi, &props, u64::MAX)? {
                stats.explicit_models = spent;
                let model = Model::new(frame, cx.valuation)?;
                return Ok(Some((model, cx.state, cx.value)));
            }
            let Some(pos) = choice.iter().rposition(|&i| i + 1 < tables.len()) else { break };
            choice[pos] += 1;
            choice[pos + 1..].iter_mut().for_each(|i| *i = 0);
        }
        stats.explicit_states = m as u64;
    }
    stats.explicit_models = spent;
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn random_search(
    phi: &Formula,
    logic: Logic,
    chain: Chain,
    k: u32,
    max_states: u64,
    seed: u64,
    samples: u64,
    stats: &mut SearchStats,
) -> Result<Option<(Model, usize, u8)>, DecisionError> {
    let props: Vec<u32> = phi.props().into_iter().collect();
    let closure = ClosureSet::new(phi);
    let mut sampler = PlayableSampler::new();
    let mut r = rng(seed);
    let largest = max_states.clamp(1, 6) as usize;
    for _ in 0..samples {
        stats.random_samples += 1;
        let m = rand::Rng::gen_range(&mut r, 1..=largest);
        let model = crate::corpus::random_model(&mut sampler, &mut r, chain, k, m, &props);
        let model = Model::new(frame_for(logic, model.frame), model.val)?;
        let values = model.evaluate_closure(&closure)?;
        if let Some(state) = values[closure.root()].iter().position(|&v| v < chain.n()) {
            let value = values[closure.root()][state];
            return Ok(Some((model, state, value)));
        }
    }
    Ok(None)
}

/// Fixed-width bit set over positions in the current list of types.
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn full(len: usize) -> Bits {
        let mut words = vec![u64::MAX; len.div_ceil(64)];
        if !len.is_multiple_of(64) {
            *words.last_mut().expect("nonzero length") = (1u64 << (len % 64)) - 1;
        }
        Bits(words)
    }

    fn empty(len: usize) -> Bits {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

#[derive(Clone, Copy)]
enum Modality {
    Box(Coalition),
    O,
}

struct ModalAtom {
    node: usize,
    modality: Modality,
    child: usize,
}

struct TypeSpace {
    chain: Chain,
    k: u32,
    logic: Logic,
    closure: ClosureSet,
    /// Closure indices of the atoms, in digit order.
    atoms: Vec<usize>,
    modal: Vec<ModalAtom>,
    /// Distinct arguments of modal atoms.
    children: Vec<usize>,
    types: usize,
    /// `values[t * closure.len() + node]`.
    values: Vec<u8>,
}

/// Positive constraints grouped by coalition, negative constraints, and the upper
/// bound on the core, all for one type over one list of types.
struct Constraints<'a> {
    zmax: Bits,
    groups: Vec<(Coalition, Vec<&'a Bits>)>,
    negatives: Vec<(Coalition, &'a Bits)>,
}

impl TypeSpace {
    fn new(phi: &Formula, logic: Logic, chain: Chain, k: u32, budget: u64) -> Option<TypeSpace> {
        let closure = ClosureSet::new(phi);
        let atoms: Vec<usize> = (0..closure.len()).filter(|&i| is_atom(&closure.nodes()[i])).collect();
        let count = (chain.n() as u64 + 1).checked_pow(atoms.len() as u32)?;
        if count > budget {
            return None;
        }
        let types = count as usize;
        let len = closure.len();
        let base = chain.n() as usize + 1;
        let mut values = vec![0u8; types * len];
        let mut digit_of = vec![usize::MAX; len];
        for (d, &a) in atoms.iter().enumerate() {
            digit_of[a] = d;
        }
        for t in 0..types {
            let row = &mut values[t * len..(t + 1) * len];
            for (i, node) in closure.nodes().iter().enumerate() {
                row[i] = match *node {
                    ClosureNode::Top => chain.n(),
                    ClosureNode::Neg(a) => chain.neg(row[a]),
                    ClosureNode::Implies(a, b) => chain.implies(row[a], row[b]),
                    _ => (t / base.pow(digit_of[i] as u32) % base) as u8,
                };
            }
        }
        let modal: Vec<ModalAtom> = atoms
            .iter()
            .filter_map(|&node| match closure.nodes()[node] {
                ClosureNode::Box(c, child) => Some(ModalAtom { node, modality: Modality::Box(c), child }),
                ClosureNode::BoxO(child) => Some(ModalAtom { node, modality: Modality::O, child }),
                _ => None,
            })
            .collect();
        let mut children: Vec<usize> = modal.iter().map(|a| a.child).collect();
        children.sort_unstable();
        children.dedup();
        Some(TypeSpace { chain, k, logic, closure, atoms, modal, children, types, values })
    }

    fn value(&self, t: usize, node: usize) -> u8 {
        self.values[t * self.closure.len() + node]
    }

    /// For each modal argument ψ and each `i ∈ 1..=n`, the positions with `ψ ≥ i`.
    fn level_sets(&self, list: &[usize]) -> Vec<Vec<Bits>> {
        let n = self.chain.n();
        self.children
            .iter()
            .map(|&child| {
                (1..=n)
                    .map(|i| {
                        let mut bits = Bits::empty(list.len());
                        for (pos, &t) in list.iter().enumerate() {
                            if self.value(t, child) >= i {
                                bits.set(pos);
                            }
                        }
                        bits
                    })
                    .collect()
            })
            .collect()
    }

    /// Turns the modal values of type t into constraints on a Boolean table H with
    /// `E = lift(H)`: value a for `[C]ψ` means `{ψ ≥ i}` is C-effective exactly for i ≤ a.
    /// Returns `None` if the core bound is already empty or an [O] or ∅ constraint fails.
    fn constraints<'a>(&self, t: usize, list_len: usize, levels: &'a [Vec<Bits>]) -> Option<Constraints<'a>> {
        let n = self.chain.n();
        let grand = Coalition::grand(self.k);
        let level = |child: usize, i: u8| -> &'a Bits {
            let c = self.children.binary_search(&child).expect("registered child");
            &levels[c][i as usize - 1]
        };
        let mut zmax = Bits::full(list_len);
        for atom in &self.modal {
            let a = self.value(t, atom.node);
            match atom.modality {
                Modality::Box(c) if c == Coalition::EMPTY && a > 0 => zmax = zmax.and(level(atom.child, a)),
                Modality::Box(c) if c == grand && a < n => zmax = zmax.and_not(level(atom.child, a + 1)),
                Modality::O if a > 0 => zmax = zmax.and(level(atom.child, a)),
                _ => {}
            }
        }
        if zmax.is_empty() {
            return None;
        }
        let mut groups: Vec<(Coalition, Vec<&Bits>)> = Vec::new();
        let mut negatives = Vec::new();
        for atom in &self.modal {
            let a = self.value(t, atom.node);
            match atom.modality {
                Modality::O | Modality::Box(Coalition::EMPTY) => {
                    // Some element of the core must have ψ ≤ a.
                    if a < n && zmax.is_subset(level(atom.child, a + 1)) {
                        return None;
                    }
                }
                Modality::Box(c) => {
                    if a > 0 {
                        match groups.iter_mut().find(|(d, _)| *d == c) {
                            Some((_, sets)) => sets.push(level(atom.child, a)),
                            None => groups.push((c, vec![level(atom.child, a)])),
                        }
                    }
                    if a < n && c != grand {
                        negatives.push((c, level(atom.child, a + 1)));
                    }
                }
            }
        }
        groups.sort_by_key(|(c, _)| c.mask());
        Some(Constraints { zmax, groups, negatives })
    }

    fn realizable(&self, t: usize, list_len: usize, levels: &[Vec<Bits>]) -> bool {
        let Some(cons) = self.constraints(t, list_len, levels) else { return false };
        families(&cons.groups, 0, Coalition::EMPTY, &cons.zmax, &mut |used, cur| {
            (used == Coalition::EMPTY || !cur.is_empty())
                && cons.negatives.iter().all(|(d, y)| !used.is_subset(*d) || !cur.is_subset(y))
        })
    }

    /// Greatest subset of `list` all of whose types are realizable over it.
    fn fixpoint(&self, mut list: Vec<usize>) -> (Vec<usize>, u32) {
        let mut rounds = 0;
        loop {
            rounds += 1;
            let levels = self.level_sets(&list);
            let kept: Vec<usize> = list.iter().copied().filter(|&t| self.realizable(t, list.len(), &levels)).collect();
            if kept.len() == list.len() {
                return (list, rounds);
            }
            list = kept;
        }
    }

    fn falsifies(&self, list: &[usize]) -> bool {
        list.iter().any(|&t| self.value(t, self.closure.root()) < self.chain.n())
    }

    /// Shrinks a falsifying fixpoint by removing blocks of types while a falsifying
    /// type survives.
    fn minimize(&self, mut list: Vec<usize>) -> Vec<usize> {
        if list.len() > 4096 {
            return list;
        }
        let mut chunk = list.len().div_ceil(2);
        while chunk >= 1 {
            let mut start = 0;
            while start < list.len() {
                let end = (start + chunk).min(list.len());
                let candidate: Vec<usize> = list[..start].iter().chain(&list[end..]).copied().collect();
                let (kept, _) = if candidate.is_empty() { (candidate, 0) } else { self.fixpoint(candidate) };
                if self.falsifies(&kept) {
                    list = kept;
                } else {
                    start = end;
                }
            }
            if chunk == 1 {
                break;
            }
            chunk = chunk.div_ceil(2);
        }
        list
    }

    /// Builds the model whose states are `list` and checks that every atom takes the
    /// value its type prescribes.
    fn countermodel(&self, list: &[usize]) -> Result<(Model, usize, u8), DecisionError> {
        let m = list.len();
        let levels = self.level_sets(list);
        let grand = Coalition::grand(self.k);
        let mut tables = Vec::with_capacity(m);
        for &t in list {
            let cons = self
                .constraints(t, m, &levels)
                .ok_or_else(|| DecisionError::Invariant("surviving type lost its core".into()))?;
            let z = cons.zmax.0[0];
            let mut minimal: Vec<Vec<u64>> = vec![Vec::new(); 1 << self.k];
            for c in Coalition::all(self.k) {
                families(&cons.groups, 0, Coalition::EMPTY, &cons.zmax, &mut |used, cur| {
                    if used.is_subset(c) {
                        minimal[c.mask() as usize].push(cur.0[0]);
                    }
                    true
                });
            }
            let h = EffFn::from_fn(Chain::BOOLEAN, self.k, default_outcomes(m), DEFAULT_CELL_BUDGET, |c, x| {
                let x = x as u64;
                let effective = if c == Coalition::EMPTY {
                    x & z == z
                } else if c == grand {
                    x & z != 0
                } else {
                    minimal[c.mask() as usize].iter().any(|&s| s & !x == 0)
                };
                effective as u8
            })?;
            tables.push(lift_unchecked(&h, self.chain, DEFAULT_CELL_BUDGET)?);
        }
        let names: Vec<String> = list.iter().map(|t| format!("t{t}")).collect();
        let frame = frame_for(self.logic, Frame::new(names, tables, None)?);
        if !frame.is_playable() {
            return Err(DecisionError::Invariant("constructed frame is not playable".into()));
        }
        let mut val = Valuation::new();
        for &a in &self.atoms {
            if let ClosureNode::Prop(p) = self.closure.nodes()[a] {
                val.insert(p, list.iter().map(|&t| self.value(t, a)).collect());
            }
        }
        let model = Model::new(frame, val)?;
        let computed = evaluate(&model.frame, &model.val, &self.closure)?;
        for (pos, &t) in list.iter().enumerate() {
            for node in 0..self.closure.len() {
                if computed[node][pos] != self.value(t, node) {
                    return Err(DecisionError::Invariant(format!(
                        "state t{t} gives {} the value {} instead of {}",
                        self.closure.formulas()[node],
                        computed[node][pos],
                        self.value(t, node)
                    )));
                }
            }
        }
        let root = &computed[self.closure.root()];
        let state = root.iter().position(|&v| v < self.chain.n()).expect("list falsifies the formula");
        Ok((model, state, root[state]))
    }
}

/// Visits every family of positive constraints with pairwise disjoint coalitions,
/// passing the union of the coalitions and the intersection of the chosen sets with
/// the starting set. Stops and returns false as soon as `visit` does.
fn families(
    groups: &[(Coalition, Vec<&Bits>)],
    from: usize,
    used: Coalition,
    cur: &Bits,
    visit: &mut impl FnMut(Coalition, &Bits) -> bool,
) -> bool {
    if !visit(used, cur) {
        return false;
    }
    for (j, (c, sets)) in groups.iter().enumerate().skip(from) {
        if !c.is_disjoint(used) {
            continue;
        }
        for set in sets {
            if !families(groups, j + 1, used.union(*c), &cur.and(set), visit) {
                return false;
            }
        }
    }
    true
}

/// Outcome of checking axioms and rules on a corpus of models.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub models: usize,
    pub axiom_instances: u64,
    pub rule_applications: u64,
    pub failures: Vec<String>,
}

/// Checks that every axiom instance holds on every frame, and that modus ponens,
/// monotonicity, [∅]-necessitation and uniform substitution (for the given formulas
/// substituted into axiom instances) preserve truth in each model.
pub fn soundness_suite(logic: Logic, models: &[Model], formulas: &[Formula]) -> Result<SoundnessReport, DecisionError> {
    let mut report = SoundnessReport { models: models.len(), ..Default::default() };
    for (index, model) in models.iter().enumerate() {
        let frame = &model.frame;
        let (chain, k) = (frame.chain(), frame.players());
        if logic == Logic::TPn && !frame.is_standard() {
            return Err(DecisionError::Invariant(format!("model {index} is not standard enriched")));
        }
        let schemas = Schema::instances(logic, k, chain);
        for &schema in &schemas {
            report.axiom_instances += 1;
            if let Some(cx) = check_axiom_schema(frame, schema)? {
                report.failures.push(format!("model {index}: {schema:?} fails at state {}", cx.state));
            }
        }
        let truth: Vec<bool> = formulas.iter().map(|f| model.is_true(f)).collect::<Result<_, _>>()?;
        for (i, phi) in formulas.iter().enumerate() {
            if truth[i] {
                report.rule_applications += 1;
                if !model.is_true(&phi.boxed(Coalition::EMPTY))? {
                    report.failures.push(format!("model {index}: necessitation fails for {phi}"));
                }
            }
            for (j, psi) in formulas.iter().enumerate() {
                let imp = phi.implies(psi);
                if !model.is_true(&imp)? {
                    continue;
                }
                report.rule_applications += 1;
                if truth[i] && !truth[j] {
                    report.failures.push(format!("model {index}: modus ponens fails for {phi}, {psi}"));
                }
                for c in Coalition::all(k) {
                    if !model.is_true(&phi.boxed(c).implies(&psi.boxed(c)))? {
                        report.failures.push(format!("model {index}: monotonicity fails for {c}, {phi}, {psi}"));
                    }
                }
            }
            for &schema in &schemas {
                if !schema.variables().contains(&1) {
                    continue;
                }
                report.rule_applications += 1;
                let instance = schema.formula(k, chain).substitute(1, phi);
                if !model.is_true(&instance)? {
                    report.failures.push(format!("model {index}: substitution of {phi} into {schema:?} fails"));
                }
            }
        }
    }
    Ok(report)
}

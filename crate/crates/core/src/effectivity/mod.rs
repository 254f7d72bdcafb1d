//! Łn-valued effectivity functions as explicit tables, and their playability properties.

mod lift;
mod synth;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::game_form::GameFormError;
use crate::mv::{Chain, MvAlgebra, MvFilterView};
use crate::syntax::{Coalition, MAX_PLAYERS};

pub use lift::{lift_boolean, lift_unchecked};
pub use synth::{synthesize_game_form, synthesize_game_form_with, outcome_core};

/// Default cap on `2^k · (n+1)^|S|` table cells.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EffectivityError {
    #[error("malformed effectivity table: {0}")]
    Shape(String),
    #[error("table needs {cells} cells, budget is {budget}")]
    BudgetExceeded { cells: u64, budget: u64 },
    #[error("table takes a non-Boolean value on an idempotent argument")]
    NotBoolean,
    #[error("input is not playable ({0} fails)")]
    NotPlayableInput(Property),
    #[error("table is not homogeneous")]
    NotHomogeneous,
    #[error("table is not truly playable")]
    NotTrulyPlayable,
    #[error("no game form with at most {budget} strategies per player realizes the table")]
    SynthesisBudgetExceeded { budget: u32 },
    #[error(transparent)]
    GameForm(#[from] GameFormError),
}

/// The function space Łn^S, each f encoded as `Σ_j f(s_j)·(n+1)^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnSpace {
    chain: Chain,
    len: usize,
    pows: Vec<usize>,
    count: usize,
}

impl FnSpace {
    /// Fails when `(n+1)^len` exceeds `budget`.
    pub fn new(chain: Chain, len: usize, budget: u64) -> Result<FnSpace, EffectivityError> {
        let base = chain.size() as u64;
        let mut pows = Vec::with_capacity(len + 1);
        let mut p: u64 = 1;
        for _ in 0..len {
            pows.push(p as usize);
            p = p.saturating_mul(base);
            if p > budget {
                return Err(EffectivityError::BudgetExceeded { cells: p, budget });
            }
        }
        Ok(FnSpace { chain, len, pows, count: p as usize })
    }

    #[inline]
    pub fn chain(&self) -> Chain {
        self.chain
    }

    /// |S|
    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// (n+1)^|S|
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn codes(&self) -> std::ops::Range<usize> {
        0..self.count
    }

    #[inline]
    pub fn digit(&self, code: usize, j: usize) -> u8 {
        (code / self.pows[j] % self.chain.size()) as u8
    }

    pub fn decode(&self, code: usize) -> Vec<u8> {
        (0..self.len).map(|j| self.digit(code, j)).collect()
    }

    pub fn encode(&self, f: &[u8]) -> usize {
        debug_assert_eq!(f.len(), self.len);
        f.iter().zip(&self.pows).map(|(&d, &p)| d as usize * p).sum()
    }

    pub fn top(&self) -> usize {
        self.count - 1
    }

    pub fn constant(&self, value: u8) -> usize {
        self.pows.iter().map(|&p| value as usize * p).sum()
    }

    /// `χ_X` for X given as a bitmask over S.
    pub fn characteristic(&self, set: u64) -> usize {
        let n = self.chain.n() as usize;
        (0..self.len).filter(|&j| set >> j & 1 == 1).map(|j| n * self.pows[j]).sum()
    }

    pub fn map(&self, code: usize, op: impl Fn(u8) -> u8) -> usize {
        (0..self.len).map(|j| op(self.digit(code, j)) as usize * self.pows[j]).sum()
    }

    pub fn zip(&self, a: usize, b: usize, op: impl Fn(u8, u8) -> u8) -> usize {
        (0..self.len).map(|j| op(self.digit(a, j), self.digit(b, j)) as usize * self.pows[j]).sum()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        (0..self.len).all(|j| self.digit(a, j) <= self.digit(b, j))
    }

    pub fn neg(&self, code: usize) -> usize {
        self.top() - code
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.zip(a, b, |x, y| x.min(y))
    }

    /// Boolean-valued f, i.e. f ⊕ f = f.
    pub fn is_idempotent(&self, code: usize) -> bool {
        let n = self.chain.n();
        (0..self.len).all(|j| matches!(self.digit(code, j), d if d == 0 || d == n))
    }

    /// `{s_j | f(s_j) >= i}` as a bitmask, i.e. the support of `τ_{i/n}(f)`.
    pub fn upper_set(&self, code: usize, i: u8) -> u64 {
        (0..self.len).filter(|&j| self.digit(code, j) >= i).fold(0, |m, j| m | 1 << j)
    }

    /// All codes covering `code` in the pointwise order (one coordinate raised by 1/n).
    pub fn covers(&self, code: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.chain.n();
        (0..self.len).filter(move |&j| self.digit(code, j) < n).map(move |j| code + self.pows[j])
    }
}

/// Names `s0, s1, ...` used when a table is built without explicit outcome names.
pub fn default_outcomes(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("s{j}")).collect()
}

/// An Łn-valued effectivity function `P N × Łn^S → Łn` as a dense table.
///
/// Row `C` (coalition bitmask) holds `E(C, f)` for every code of f, as numerators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffFn {
    space: FnSpace,
    k: u32,
    outcomes: Vec<String>,
    table: Vec<u8>,
}

/// The n = 1 case: a Boolean effectivity function, with f read as a subset of S.
pub type BoolEffFn = EffFn;

impl EffFn {
    /// `k ≥ 2` players and `|S| ≥ 1` outcomes (one-outcome tables arise from one-class quotients).
    pub fn new(chain: Chain, k: u32, outcomes: Vec<String>, table: Vec<u8>) -> Result<EffFn, EffectivityError> {
        Self::new_with_budget(chain, k, outcomes, table, DEFAULT_CELL_BUDGET)
    }

    pub fn new_with_budget(
        chain: Chain,
        k: u32,
        outcomes: Vec<String>,
        table: Vec<u8>,
        budget: u64,
    ) -> Result<EffFn, EffectivityError> {
        let space = Self::check_shape(chain, k, &outcomes, budget)?;
        let expected = space.count() << k;
        if table.len() != expected {
            return Err(EffectivityError::Shape(format!("expected {expected} cells, got {}", table.len())));
        }
        if let Some(v) = table.iter().find(|&&v| v > chain.n()) {
            return Err(EffectivityError::Shape(format!("value {v} exceeds n = {}", chain.n())));
        }
        Ok(EffFn { space, k, outcomes, table })
    }

    fn check_shape(chain: Chain, k: u32, outcomes: &[String], budget: u64) -> Result<FnSpace, EffectivityError> {
        if !(2..=MAX_PLAYERS).contains(&k) {
            return Err(EffectivityError::Shape(format!("player count {k} outside 2..={MAX_PLAYERS}")));
        }
        if outcomes.is_empty() || outcomes.len() > 64 {
            return Err(EffectivityError::Shape(format!("outcome count {} outside 1..=64", outcomes.len())));
        }
        let space = FnSpace::new(chain, outcomes.len(), budget >> k)
            .map_err(|_| EffectivityError::BudgetExceeded { cells: table_cells(chain, k, outcomes.len()), budget })?;
        Ok(space)
    }

    /// Builds the table cell by cell from `(C, code of f) ↦ numerator`.
    pub fn from_fn(
        chain: Chain,
        k: u32,
        outcomes: Vec<String>,
        budget: u64,
        mut cell: impl FnMut(Coalition, usize) -> u8,
    ) -> Result<EffFn, EffectivityError> {
        let space = Self::check_shape(chain, k, &outcomes, budget)?;
        let mut table = Vec::with_capacity(space.count() << k);
        for c in Coalition::all(k) {
            for code in space.codes() {
                table.push(cell(c, code));
            }
        }
        EffFn::new_with_budget(chain, k, outcomes, table, budget)
    }

    #[inline]
    pub fn chain(&self) -> Chain {
        self.space.chain
    }

    #[inline]
    pub fn players(&self) -> u32 {
        self.k
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.k)
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn space(&self) -> &FnSpace {
        &self.space
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    /// `E(C, f)` for f given by its code.
    #[inline]
    pub fn get(&self, c: Coalition, code: usize) -> u8 {
        self.table[(c.mask() as usize) * self.space.count + code]
    }

    /// `E(C, f)` for f given pointwise.
    pub fn value(&self, c: Coalition, f: &[u8]) -> u8 {
        self.get(c, self.space.encode(f))
    }

    pub fn row(&self, c: Coalition) -> &[u8] {
        let w = self.space.count;
        &self.table[c.mask() as usize * w..(c.mask() as usize + 1) * w]
    }

    pub fn with_outcomes(mut self, outcomes: Vec<String>) -> Result<EffFn, EffectivityError> {
        if outcomes.len() != self.outcomes.len() {
            return Err(EffectivityError::Shape("outcome renaming changes |S|".into()));
        }
        self.outcomes = outcomes;
        Ok(self)
    }

    /// Same shape, different cell values.
    pub fn map_cells(&self, mut cell: impl FnMut(Coalition, usize, u8) -> u8) -> EffFn {
        let mut out = self.clone();
        let w = self.space.count;
        for (idx, v) in out.table.iter_mut().enumerate() {
            *v = cell(Coalition((idx / w) as u32), idx % w, *v);
        }
        out
    }
}

pub fn table_cells(chain: Chain, k: u32, outcomes: usize) -> u64 {
    (chain.size() as u64).saturating_pow(outcomes as u32).saturating_mul(1 << k)
}

/// `E♯`: restriction to the idempotent f, returned as a Boolean table.
pub fn boolean_skeleton(e: &EffFn) -> Result<BoolEffFn, EffectivityError> {
    let n = e.chain().n();
    let sets = 1usize << e.space.len();
    let mut table = Vec::with_capacity(sets << e.k);
    for c in Coalition::all(e.k) {
        for x in 0..sets as u64 {
            let v = e.get(c, e.space.characteristic(x));
            if v != 0 && v != n {
                return Err(EffectivityError::NotBoolean);
            }
            table.push((v == n) as u8);
        }
    }
    EffFn::new_with_budget(Chain::BOOLEAN, e.k, e.outcomes.clone(), table, u64::MAX)
}

/// Homogeneous tables agree iff their skeletons do.
pub fn equal_by_skeleton(a: &EffFn, b: &EffFn) -> Result<bool, EffectivityError> {
    for e in [a, b] {
        if !check_property(e, Property::Homogeneous).holds {
            return Err(EffectivityError::NotHomogeneous);
        }
    }
    if a.chain() != b.chain() || a.k != b.k || a.space.len() != b.space.len() {
        return Ok(false);
    }
    let same = boolean_skeleton(a)?.table == boolean_skeleton(b)?.table;
    debug_assert_eq!(same, a.table == b.table, "homogeneous tables must be determined by their skeletons");
    Ok(same)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    OutcomeMonotonic,
    NMaximal,
    Regular,
    Superadditive,
    CoalitionMonotonic,
    Homogeneous,
    Liveness,
    Safety,
    Principal,
    SemiPlayable,
    Playable,
    TrulyPlayable,
}

impl Property {
    pub const ALL: [Property; 12] = [
        Property::OutcomeMonotonic,
        Property::NMaximal,
        Property::Regular,
        Property::Superadditive,
        Property::CoalitionMonotonic,
        Property::Homogeneous,
        Property::Liveness,
        Property::Safety,
        Property::Principal,
        Property::SemiPlayable,
        Property::Playable,
        Property::TrulyPlayable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::OutcomeMonotonic => "outcome_monotonic",
            Property::NMaximal => "n_maximal",
            Property::Regular => "regular",
            Property::Superadditive => "superadditive",
            Property::CoalitionMonotonic => "coalition_monotonic",
            Property::Homogeneous => "homogeneous",
            Property::Liveness => "liveness",
            Property::Safety => "safety",
            Property::Principal => "principal",
            Property::SemiPlayable => "semi_playable",
            Property::Playable => "playable",
            Property::TrulyPlayable => "truly_playable",
        }
    }

    pub fn from_name(name: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A cell (or pair of cells) at which a property fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub property: Property,
    pub coalition: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_coalition: Option<String>,
    pub f: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl PropertyCheck {
    fn ok() -> Self {
        PropertyCheck { holds: true, witness: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayabilityReport {
    pub outcome_monotonic: PropertyCheck,
    pub n_maximal: PropertyCheck,
    pub regular: PropertyCheck,
    pub superadditive: PropertyCheck,
    pub coalition_monotonic: PropertyCheck,
    pub homogeneous: PropertyCheck,
    pub liveness: PropertyCheck,
    pub safety: PropertyCheck,
    pub principal: PropertyCheck,
    pub semi_playable: PropertyCheck,
    pub playable: PropertyCheck,
    pub truly_playable: PropertyCheck,
}

impl PlayabilityReport {
    pub fn get(&self, p: Property) -> &PropertyCheck {
        match p {
            Property::OutcomeMonotonic => &self.outcome_monotonic,
            Property::NMaximal => &self.n_maximal,
            Property::Regular => &self.regular,
            Property::Superadditive => &self.superadditive,
            Property::CoalitionMonotonic => &self.coalition_monotonic,
            Property::Homogeneous => &self.homogeneous,
            Property::Liveness => &self.liveness,
            Property::Safety => &self.safety,
            Property::Principal => &self.principal,
            Property::SemiPlayable => &self.semi_playable,
            Property::Playable => &self.playable,
            Property::TrulyPlayable => &self.truly_playable,
        }
    }
}

struct Checker<'a> {
    e: &'a EffFn,
    property: Property,
}

impl Checker<'_> {
    fn fail(&self, c: Coalition, f: usize) -> PropertyCheck {
        self.fail_full(c, None, f, None)
    }

    fn fail_full(&self, c: Coalition, d: Option<Coalition>, f: usize, g: Option<usize>) -> PropertyCheck {
        let space = &self.e.space;
        PropertyCheck {
            holds: false,
            witness: Some(Witness {
                property: self.property,
                coalition: c.to_string(),
                other_coalition: d.map(|d| d.to_string()),
                f: space.decode(f),
                g: g.map(|g| space.decode(g)),
            }),
        }
    }

    /// `f ≤ g ⇒ E(C,f) ≤ E(C,g)` for coalitions accepted by `which`; checking covers suffices.
    fn monotone(&self, which: impl Fn(Coalition) -> bool) -> PropertyCheck {
        let e = self.e;
        for c in Coalition::all(e.k).filter(|&c| which(c)) {
            for f in e.space.codes() {
                let v = e.get(c, f);
                if let Some(g) = e.space.covers(f).find(|&g| e.get(c, g) < v) {
                    return self.fail_full(c, None, f, Some(g));
                }
            }
        }
        PropertyCheck::ok()
    }

    fn constant(&self, code: usize, expected: u8, which: impl Fn(Coalition) -> bool) -> PropertyCheck {
        match Coalition::all(self.e.k).find(|&c| which(c) && self.e.get(c, code) != expected) {
            Some(c) => self.fail(c, code),
            None => PropertyCheck::ok(),
        }
    }

    fn superadditive(&self, which: impl Fn(Coalition, Coalition) -> bool) -> PropertyCheck {
        let e = self.e;
        let space = &e.space;
        for c1 in Coalition::all(e.k) {
            for c2 in Coalition::all(e.k).filter(|&c2| c1.is_disjoint(c2) && which(c1, c2)) {
                let union = c1.union(c2);
                for f in space.codes() {
                    let a = e.get(c1, f);
                    if a == 0 {
                        continue;
                    }
                    for g in space.codes() {
                        let lower = a.min(e.get(c2, g));
                        if lower > 0 && lower > e.get(union, space.meet(f, g)) {
                            return self.fail_full(c1, Some(c2), f, Some(g));
                        }
                    }
                }
            }
        }
        PropertyCheck::ok()
    }
}

/// Exhaustive check of one property, with a witness on failure.
pub fn check_property(e: &EffFn, which: Property) -> PropertyCheck {
    let chk = Checker { e, property: which };
    let space = &e.space;
    let chain = e.chain();
    let grand = e.grand();
    let k = e.k;
    match which {
        Property::OutcomeMonotonic => chk.monotone(|_| true),
        Property::NMaximal => {
            for f in space.codes() {
                if chain.neg(e.get(Coalition::EMPTY, space.neg(f))) > e.get(grand, f) {
                    return chk.fail(grand, f);
                }
            }
            PropertyCheck::ok()
        }
        Property::Regular => {
            for c in Coalition::all(k) {
                for f in space.codes() {
                    if e.get(c, f) > chain.neg(e.get(c.complement(k), space.neg(f))) {
                        return chk.fail(c, f);
                    }
                }
            }
            PropertyCheck::ok()
        }
        Property::Superadditive => chk.superadditive(|_, _| true),
        Property::CoalitionMonotonic => {
            for c in Coalition::all(k) {
                for p in (1..=k).filter(|&p| !c.contains(p)) {
                    let d = c.union(Coalition::from_players([p]));
                    if let Some(f) = space.codes().find(|&f| e.get(c, f) > e.get(d, f)) {
                        return chk.fail_full(c, Some(d), f, None);
                    }
                }
            }
            PropertyCheck::ok()
        }
        Property::Homogeneous => {
            let double: Vec<usize> = space.codes().map(|f| space.map(f, |x| chain.tau_oplus(x))).collect();
            let square: Vec<usize> = space.codes().map(|f| space.map(f, |x| chain.tau_odot(x))).collect();
            for c in Coalition::all(k) {
                for f in space.codes() {
                    let v = e.get(c, f);
                    if e.get(c, double[f]) != chain.tau_oplus(v) || e.get(c, square[f]) != chain.tau_odot(v) {
                        return chk.fail(c, f);
                    }
                }
            }
            PropertyCheck::ok()
        }
        Property::Liveness => chk.constant(space.top(), chain.n(), |_| true),
        Property::Safety => chk.constant(0, 0, |_| true),
        Property::Principal => principal(e, &chk),
        Property::SemiPlayable => {
            let proper = |c: Coalition| c != grand;
            for check in [
                chk.monotone(proper),
                chk.constant(space.top(), chain.n(), proper),
                chk.constant(0, 0, proper),
                chk.superadditive(|c1, c2| c1.union(c2) != grand),
            ] {
                if !check.holds {
                    return check;
                }
            }
            PropertyCheck::ok()
        }
        Property::Playable => first_failure(
            e,
            which,
            &[
                Property::OutcomeMonotonic,
                Property::NMaximal,
                Property::Superadditive,
                Property::Homogeneous,
                Property::Liveness,
                Property::Safety,
            ],
        ),
        Property::TrulyPlayable => first_failure(e, which, &[Property::Playable, Property::Principal]),
    }
}

fn first_failure(e: &EffFn, which: Property, parts: &[Property]) -> PropertyCheck {
    for &p in parts {
        let check = check_property(e, p);
        if !check.holds {
            let witness = check.witness.map(|w| Witness { property: which, ..w });
            return PropertyCheck { holds: false, witness };
        }
    }
    PropertyCheck::ok()
}

/// `E(∅,−)⁻¹(1) = {f | f ≥ ⊙ⁿg}` for some g, by trying every g.
fn principal(e: &EffFn, chk: &Checker<'_>) -> PropertyCheck {
    let space = &e.space;
    let chain = e.chain();
    let n = chain.n() as u32;
    let filter: Vec<bool> = space.codes().map(|f| e.get(Coalition::EMPTY, f) == chain.n()).collect();
    let mut tried = std::collections::HashSet::new();
    for g in space.codes() {
        let generator = space.map(g, |x| chain.odot_power(x, n));
        if tried.insert(generator) && space.codes().all(|f| filter[f] == space.leq(generator, f)) {
            return PropertyCheck::ok();
        }
    }
    // The smallest candidate is the pointwise meet of the filter; report where it disagrees.
    let meet = space.codes().filter(|&f| filter[f]).fold(space.top(), |m, f| space.meet(m, f));
    let generator = space.map(meet, |x| chain.odot_power(x, n));
    let f = space.codes().find(|&f| filter[f] != space.leq(generator, f)).unwrap_or(space.top());
    chk.fail_full(Coalition::EMPTY, None, f, Some(generator))
}

pub fn playability_report(e: &EffFn) -> PlayabilityReport {
    let c = |p| check_property(e, p);
    let outcome_monotonic = c(Property::OutcomeMonotonic);
    let n_maximal = c(Property::NMaximal);
    let superadditive = c(Property::Superadditive);
    let homogeneous = c(Property::Homogeneous);
    let liveness = c(Property::Liveness);
    let safety = c(Property::Safety);
    let principal = c(Property::Principal);
    let playable = [&outcome_monotonic, &n_maximal, &superadditive, &homogeneous, &liveness, &safety]
        .into_iter()
        .find(|p| !p.holds)
        .map(|p| PropertyCheck {
            holds: false,
            witness: p.witness.clone().map(|w| Witness { property: Property::Playable, ..w }),
        })
        .unwrap_or_else(PropertyCheck::ok);
    let truly_playable = [&playable, &principal]
        .into_iter()
        .find(|p| !p.holds)
        .map(|p| PropertyCheck {
            holds: false,
            witness: p.witness.clone().map(|w| Witness { property: Property::TrulyPlayable, ..w }),
        })
        .unwrap_or_else(PropertyCheck::ok);
    PlayabilityReport {
        regular: c(Property::Regular),
        coalition_monotonic: c(Property::CoalitionMonotonic),
        semi_playable: c(Property::SemiPlayable),
        outcome_monotonic,
        n_maximal,
        superadditive,
        homogeneous,
        liveness,
        safety,
        principal,
        playable,
        truly_playable,
    }
}

pub fn is_playable(e: &EffFn) -> bool {
    check_property(e, Property::Playable).holds
}

pub fn is_truly_playable(e: &EffFn) -> bool {
    check_property(e, Property::TrulyPlayable).holds
}

/// `E(C,−)⁻¹(1)` as a subset of the algebra Łn^S (elements are codes).
pub fn one_set<'a>(e: &EffFn, c: Coalition, algebra: &'a MvAlgebra) -> MvFilterView<'a> {
    MvFilterView::from_elements(algebra, e.space.codes().filter(|&f| e.get(c, f) == e.chain().n()))
}

//! Finite strategic game forms and their effectivity.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::effectivity::{EffFn, EffectivityError, FnSpace, DEFAULT_CELL_BUDGET};
use crate::mv::Chain;
use crate::syntax::{Coalition, MAX_PLAYERS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameFormError {
    #[error("a game form needs 2..={MAX_PLAYERS} players, got {0}")]
    PlayerCount(u32),
    #[error("a game form needs 2..=64 outcomes, got {0}")]
    OutcomeCount(usize),
    #[error("player {0} has no strategies")]
    NoStrategies(u32),
    #[error("outcome map has {got} entries, expected one per profile ({expected})")]
    OutcomeMapLength { got: usize, expected: usize },
    #[error("outcome index {0} is out of range")]
    UnknownOutcome(usize),
    #[error("duplicate outcome name {0:?}")]
    DuplicateOutcome(String),
    #[error("social choice construction needs at least one preference profile")]
    EmptyProfileSet,
    #[error("outcome set P(S') is too large for |S'| = {0}")]
    TooManyAlternatives(usize),
}

/// Players `1..=k`, player `i` choosing among `strategies[i-1]` strategies.
///
/// Profiles are mixed-radix indices in row-major order: player 1 is the most
/// significant digit. `outcome_map[profile]` is an index into `outcomes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameForm {
    strategies: Vec<u32>,
    outcomes: Vec<String>,
    outcome_map: Vec<usize>,
}

impl GameForm {
    pub fn new(strategies: Vec<u32>, outcomes: Vec<String>, outcome_map: Vec<usize>) -> Result<GameForm, GameFormError> {
        let k = strategies.len() as u32;
        if !(2..=MAX_PLAYERS).contains(&k) {
            return Err(GameFormError::PlayerCount(k));
        }
        if !(2..=64).contains(&outcomes.len()) {
            return Err(GameFormError::OutcomeCount(outcomes.len()));
        }
        if let Some(i) = strategies.iter().position(|&m| m == 0) {
            return Err(GameFormError::NoStrategies(i as u32 + 1));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = outcomes.iter().find(|o| !seen.insert(o.as_str())) {
            return Err(GameFormError::DuplicateOutcome(dup.clone()));
        }
        let expected = strategies.iter().map(|&m| m as usize).product();
        if outcome_map.len() != expected {
            return Err(GameFormError::OutcomeMapLength { got: outcome_map.len(), expected });
        }
        if let Some(&bad) = outcome_map.iter().find(|&&o| o >= outcomes.len()) {
            return Err(GameFormError::UnknownOutcome(bad));
        }
        Ok(GameForm { strategies, outcomes, outcome_map })
    }

    pub fn players(&self) -> u32 {
        self.strategies.len() as u32
    }

    pub fn strategies(&self) -> &[u32] {
        &self.strategies
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn outcome_map(&self) -> &[usize] {
        &self.outcome_map
    }

    pub fn profile_count(&self) -> usize {
        self.outcome_map.len()
    }

    /// Strategy of each player (0-based) in a profile index.
    pub fn profile(&self, mut index: usize) -> Vec<u32> {
        let mut out = vec![0; self.strategies.len()];
        for (slot, &m) in out.iter_mut().zip(&self.strategies).rev() {
            *slot = (index % m as usize) as u32;
            index /= m as usize;
        }
        out
    }

    pub fn outcome(&self, profile: &[u32]) -> usize {
        let index = profile.iter().zip(&self.strategies).fold(0usize, |acc, (&s, &m)| acc * m as usize + s as usize);
        self.outcome_map[index]
    }

    /// The range of the outcome map, as a bitmask over S.
    pub fn range(&self) -> u64 {
        self.outcome_map.iter().fold(0, |m, &o| m | 1 << o)
    }

    /// For each joint strategy σ_C, the set of outcomes the complement can still reach.
    ///
    /// Returned deduplicated and sorted; only these sets matter for effectivity.
    pub fn reachable_sets(&self, c: Coalition) -> Vec<u64> {
        let mut by_choice: std::collections::HashMap<Vec<u32>, u64> = std::collections::HashMap::new();
        for (index, &o) in self.outcome_map.iter().enumerate() {
            let profile = self.profile(index);
            let key: Vec<u32> = profile
                .iter()
                .enumerate()
                .filter(|&(i, _)| c.contains(i as u32 + 1))
                .map(|(_, &s)| s)
                .collect();
            *by_choice.entry(key).or_insert(0) |= 1 << o;
        }
        let sets: BTreeSet<u64> = by_choice.into_values().collect();
        sets.into_iter().collect()
    }
}

/// `H_G(C, X)`: some σ_C forces the outcome into X whatever the others do.
pub fn boolean_effectivity(g: &GameForm, c: Coalition, x: u64) -> bool {
    g.reachable_sets(c).iter().any(|&reach| reach & !x == 0)
}

/// `E_G(C, f) = max_{σ_C} min_{σ_C̄} f(o(σ_C σ_C̄))`.
pub fn mv_effectivity(g: &GameForm, c: Coalition, f: &[u8]) -> u8 {
    max_min(&g.reachable_sets(c), |j| f[j])
}

fn max_min(sets: &[u64], f: impl Fn(usize) -> u8) -> u8 {
    sets.iter()
        .map(|&reach| (0..64).filter(|j| reach >> j & 1 == 1).map(&f).min().expect("reachable sets are nonempty"))
        .max()
        .expect("every coalition has at least one joint strategy")
}

/// The full table of `E_G` over Łn.
pub fn effectivity_table(g: &GameForm, chain: Chain) -> Result<EffFn, EffectivityError> {
    effectivity_table_with_budget(g, chain, DEFAULT_CELL_BUDGET)
}

pub fn effectivity_table_with_budget(g: &GameForm, chain: Chain, budget: u64) -> Result<EffFn, EffectivityError> {
    let k = g.players();
    let space = FnSpace::new(chain, g.outcomes.len(), budget >> k).map_err(|_| EffectivityError::BudgetExceeded {
        cells: crate::effectivity::table_cells(chain, k, g.outcomes.len()),
        budget,
    })?;
    let reach: Vec<Vec<u64>> = Coalition::all(k).map(|c| g.reachable_sets(c)).collect();
    EffFn::from_fn(chain, k, g.outcomes.clone(), budget, |c, code| {
        max_min(&reach[c.mask() as usize], |j| space.digit(code, j))
    })
}

/// The game form of a social choice correspondence.
///
/// Every player's strategies are the supplied preference profiles; the
/// outcome set is the power set of `alternatives`, and `choice` maps a tuple
/// of profile indices (one per player) to a set of alternatives (bitmask).
pub fn from_social_choice<P>(
    alternatives: &[String],
    k: u32,
    profiles: &[P],
    choice: impl Fn(&[&P]) -> u64,
) -> Result<GameForm, GameFormError> {
    if profiles.is_empty() {
        return Err(GameFormError::EmptyProfileSet);
    }
    if alternatives.len() > 6 {
        return Err(GameFormError::TooManyAlternatives(alternatives.len()));
    }
    let outcomes: Vec<String> = (0..1u64 << alternatives.len())
        .map(|set| {
            let members: Vec<&str> = (0..alternatives.len())
                .filter(|j| set >> j & 1 == 1)
                .map(|j| alternatives[j].as_str())
                .collect();
            format!("{{{}}}", members.join(","))
        })
        .collect();
    let m = profiles.len() as u32;
    let strategies = vec![m; k as usize];
    let total = (m as usize).pow(k);
    let mut outcome_map = Vec::with_capacity(total);
    let mut choice_of = vec![0u32; k as usize];
    for index in 0..total {
        let mut rest = index;
        for slot in choice_of.iter_mut().rev() {
            *slot = (rest % m as usize) as u32;
            rest /= m as usize;
        }
        let tuple: Vec<&P> = choice_of.iter().map(|&s| &profiles[s as usize]).collect();
        let chosen = choice(&tuple);
        if chosen >> alternatives.len() != 0 {
            return Err(GameFormError::UnknownOutcome(chosen as usize));
        }
        outcome_map.push(chosen as usize);
    }
    GameForm::new(strategies, outcomes, outcome_map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effectivity::{boolean_skeleton, is_truly_playable};

    fn names(m: usize) -> Vec<String> {
        crate::effectivity::default_outcomes(m)
    }

    /// Each player picks a bit; the outcome is a when the bits agree, b otherwise.
    fn xor() -> GameForm {
        GameForm::new(vec![2, 2], vec!["a".into(), "b".into()], vec![0, 1, 1, 0]).unwrap()
    }

    #[test]
    fn xor_examples() {
        let g = xor();
        let one = Coalition::from_players([1]);
        assert!(!boolean_effectivity(&g, one, 0b01));
        for c in Coalition::all(2) {
            assert!(boolean_effectivity(&g, c, 0b11));
            assert!(!boolean_effectivity(&g, c, 0));
        }
        // Player 1's two strategies leave {a,b} open either way: min(1, 1/2) = 1/2.
        assert_eq!(mv_effectivity(&g, one, &[2, 1]), 1);
        assert_eq!(mv_effectivity(&g, Coalition::grand(2), &[2, 1]), 2);
        assert_eq!(mv_effectivity(&g, Coalition::EMPTY, &[2, 1]), 1);
    }

    #[test]
    fn profile_indexing_is_row_major() {
        let g = GameForm::new(vec![2, 3], names(6), (0..6).collect()).unwrap();
        assert_eq!(g.profile(4), vec![1, 1]);
        assert_eq!(g.outcome(&[1, 2]), 5);
        assert_eq!(g.reachable_sets(Coalition::from_players([1])), vec![0b000111, 0b111000]);
        assert_eq!(g.reachable_sets(Coalition::EMPTY), vec![0b111111]);
    }

    #[test]
    fn table_properties() {
        let g = xor();
        let t1 = effectivity_table(&g, Chain::BOOLEAN).unwrap();
        for c in Coalition::all(2) {
            for x in 0..4u64 {
                assert_eq!(t1.get(c, x as usize) == 1, boolean_effectivity(&g, c, x));
            }
        }
        let t2 = effectivity_table(&g, Chain::new(2).unwrap()).unwrap();
        assert!(is_truly_playable(&t2));
        assert_eq!(boolean_skeleton(&t2).unwrap(), t1);
        // E_G(∅,−)⁻¹(1) is the up-set of χ_{ran(o)}.
        let range = g.range();
        let space = t2.space();
        for f in space.codes() {
            assert_eq!(t2.get(Coalition::EMPTY, f) == 2, space.leq(space.characteristic(range), f));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = GameForm::new(vec![1, 1], names(12), vec![0]).unwrap();
        assert!(matches!(
            effectivity_table(&g, Chain::new(3).unwrap()),
            Err(EffectivityError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn malformed_game_forms() {
        assert_eq!(GameForm::new(vec![2], names(2), vec![0, 1]), Err(GameFormError::PlayerCount(1)));
        assert_eq!(GameForm::new(vec![1, 1], names(1), vec![0]), Err(GameFormError::OutcomeCount(1)));
        assert_eq!(GameForm::new(vec![0, 1], names(2), vec![]), Err(GameFormError::NoStrategies(1)));
        assert!(matches!(GameForm::new(vec![2, 1], names(2), vec![0]), Err(GameFormError::OutcomeMapLength { .. })));
        assert_eq!(GameForm::new(vec![1, 1], names(2), vec![2]), Err(GameFormError::UnknownOutcome(2)));
        assert!(matches!(
            GameForm::new(vec![1, 1], vec!["a".into(), "a".into()], vec![0]),
            Err(GameFormError::DuplicateOutcome(_))
        ));
    }

    #[test]
    fn social_choice_examples() {
        let alts = vec!["a".to_string(), "b".to_string()];
        // Profiles: true = prefers a, false = prefers b.
        let orders = [true, false];
        let majority = |t: &[&bool]| match (*t[0], *t[1]) {
            (true, true) => 0b01,
            (false, false) => 0b10,
            _ => 0b11,
        };
        let g = from_social_choice(&alts, 2, &orders, majority).unwrap();
        assert_eq!(g.strategies(), &[2, 2]);
        assert_eq!(g.outcomes(), &["{}", "{a}", "{b}", "{a,b}"]);
        assert_eq!(g.outcome_map(), &[1, 3, 3, 2]);

        let constant = from_social_choice(&alts, 2, &orders, |_| 0b01).unwrap();
        for c in Coalition::all(2) {
            for x in 0..16u64 {
                assert_eq!(boolean_effectivity(&constant, c, x), x & 0b10 != 0);
            }
        }

        let dictator = from_social_choice(&alts, 2, &orders, |t| if *t[0] { 0b01 } else { 0b10 }).unwrap();
        let one = Coalition::from_players([1]);
        assert!(boolean_effectivity(&dictator, one, 1 << 1));
        assert!(boolean_effectivity(&dictator, one, 1 << 2));
        assert!(!boolean_effectivity(&dictator, Coalition::from_players([2]), 1 << 1));

        assert_eq!(from_social_choice::<bool>(&alts, 2, &[], |_| 0).unwrap_err(), GameFormError::EmptyProfileSet);
    }
}

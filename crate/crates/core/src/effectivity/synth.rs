//! Bounded search for a game form realizing a truly playable table.

use super::{boolean_skeleton, is_truly_playable, BoolEffFn, EffFn, EffectivityError};
use crate::game_form::{effectivity_table_with_budget, GameForm};
use crate::syntax::Coalition;

/// `Z = ⋂{X | H(∅, X) = 1}` as a bitmask; the outcomes a realizing form must hit.
pub fn outcome_core(h: &BoolEffFn) -> u64 {
    let sets = 1u64 << h.space().len();
    (0..sets).filter(|&x| h.get(Coalition::EMPTY, x as usize) == 1).fold(sets - 1, |z, x| z & x)
}

/// Finds a game form `G` with `E_G = E`, trying strategy counts up to `budget` per player.
///
/// Candidates are ordered by total profile count, then strategy vector, then
/// outcome map (lexicographic over outcomes in `Z`). The first match is returned.
pub fn synthesize_game_form(e: &EffFn, budget: u32) -> Result<GameForm, EffectivityError> {
    synthesize_game_form_with(e, budget, is_truly_playable)
}

/// As [`synthesize_game_form`], with the true-playability precondition supplied by the caller.
pub fn synthesize_game_form_with(
    e: &EffFn,
    budget: u32,
    truly_playable: impl Fn(&EffFn) -> bool,
) -> Result<GameForm, EffectivityError> {
    if !truly_playable(e) {
        return Err(EffectivityError::NotTrulyPlayable);
    }
    let h = boolean_skeleton(e)?;
    let k = e.players();
    let sets = 1u64 << h.space().len();
    let z = outcome_core(&h);
    let targets: Vec<usize> = (0..64).filter(|j| z >> j & 1 == 1).collect();
    // Expected Boolean rows, for comparison against each candidate.
    let expected: Vec<Vec<bool>> = Coalition::all(k)
        .map(|c| (0..sets).map(|x| h.get(c, x as usize) == 1).collect())
        .collect();

    let mut shapes: Vec<Vec<u32>> = Vec::new();
    let mut shape = vec![1u32; k as usize];
    loop {
        shapes.push(shape.clone());
        let Some(pos) = shape.iter().rposition(|&m| m < budget.max(1)) else { break };
        shape[pos] += 1;
        shape[pos + 1..].iter_mut().for_each(|m| *m = 1);
    }
    shapes.sort_by_key(|s| (s.iter().map(|&m| m as u64).product::<u64>(), s.clone()));

    for strategies in shapes {
        let profiles: usize = strategies.iter().map(|&m| m as usize).product();
        if profiles < targets.len() {
            continue;
        }
        let mut digits = vec![0usize; profiles];
        loop {
            let map: Vec<usize> = digits.iter().map(|&d| targets[d]).collect();
            let g = GameForm::new(strategies.clone(), e.outcomes().to_vec(), map)?;
            if g.range() == z && realizes(&g, &expected, sets) {
                let table = effectivity_table_with_budget(&g, e.chain(), u64::MAX)?;
                assert_eq!(&table, e, "a game form with the right skeleton must have the same table");
                return Ok(g);
            }
            // Lexicographic successor with the last profile varying fastest.
            let Some(pos) = digits.iter().rposition(|&d| d + 1 < targets.len()) else { break };
            digits[pos] += 1;
            digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
        }
    }
    Err(EffectivityError::SynthesisBudgetExceeded { budget })
}

fn realizes(g: &GameForm, expected: &[Vec<bool>], sets: u64) -> bool {
    Coalition::all(g.players()).all(|c| {
        let reach = g.reachable_sets(c);
        (0..sets).all(|x| reach.iter().any(|&r| r & !x == 0) == expected[c.mask() as usize][x as usize])
    })
}

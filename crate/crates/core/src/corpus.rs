//! Generators of tables, game forms, models and formulas for property checks.
//!
//! Everything random takes an explicit seed or RNG so that runs are reproducible.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::effectivity::{default_outcomes, is_playable, lift_unchecked, EffFn, DEFAULT_CELL_BUDGET};
use crate::game_form::{effectivity_table, GameForm};
use crate::mv::Chain;
use crate::semantics::{Frame, Model};
use crate::syntax::{Coalition, Formula};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Upward-closed families of subsets of an m-element set, each as a bitmask over `0..2^m`.
pub fn upsets(m: usize) -> Vec<u64> {
    let sets = 1u64 << m;
    assert!(sets <= 6, "upset enumeration is limited to |S| <= 2; use upsets_above for |S| = 3");
    upsets_filtered(m, |_| true)
}

fn upsets_filtered(m: usize, keep: impl Fn(u64) -> bool) -> Vec<u64> {
    let sets = 1usize << m;
    let mut out = Vec::new();
    for family in 0..1u64 << sets {
        let upward = (0..sets).all(|x| {
            family >> x & 1 == 0 || (0..m).all(|j| family >> (x | 1 << j) & 1 == 1)
        });
        if upward && keep(family) {
            out.push(family);
        }
    }
    out
}

/// Every playable Boolean effectivity table with k players over m outcomes (m ≤ 3).
///
/// A playable table is fixed by its core Z: ∅ is effective exactly for supersets of Z,
/// N exactly for sets meeting Z, and every other coalition for an upset of sets that
/// meet Z. Candidates are built that way and filtered by the playability check.
pub fn boolean_playable_tables(k: u32, m: usize) -> Vec<EffFn> {
    assert!((1..=3).contains(&m), "exhaustive generation supports 1..=3 outcomes");
    let sets = 1usize << m;
    let all = upsets_filtered(m, |family| family & 1 == 0);
    let mut out = Vec::new();
    let grand = Coalition::grand(k);
    let middle: Vec<Coalition> = Coalition::all(k).filter(|&c| c != Coalition::EMPTY && c != grand).collect();
    for z in 1..sets as u64 {
        let meets_z: Vec<u64> = all
            .iter()
            .copied()
            .filter(|&family| (0..sets).all(|x| family >> x & 1 == 0 || x as u64 & z != 0))
            .collect();
        let mut choice = vec![0usize; middle.len()];
        loop {
            let families: HashMap<u32, u64> =
                middle.iter().zip(&choice).map(|(c, &i)| (c.mask(), meets_z[i])).collect();
            let table = EffFn::from_fn(Chain::BOOLEAN, k, default_outcomes(m), DEFAULT_CELL_BUDGET, |c, x| {
                let x = x as u64;
                let v = if c == Coalition::EMPTY {
                    x & z == z
                } else if c == grand {
                    x & z != 0
                } else {
                    families[&c.mask()] >> x & 1 == 1
                };
                v as u8
            })
            .expect("small tables fit the budget");
            if is_playable(&table) {
                out.push(table);
            }
            let Some(pos) = choice.iter().rposition(|&i| i + 1 < meets_z.len()) else { break };
            choice[pos] += 1;
            choice[pos + 1..].iter_mut().for_each(|i| *i = 0);
        }
    }
    out
}

/// All `2^(2^k · 2^m)` Boolean tables, filtered by playability. Only sensible for k = 2, m ≤ 2.
pub fn boolean_playable_tables_brute(k: u32, m: usize) -> Vec<EffFn> {
    let cells = (1usize << k) << m;
    assert!(cells <= 20, "brute force limited to 2^20 candidate tables");
    (0..1u64 << cells)
        .filter_map(|bits| {
            let table = (0..cells).map(|i| (bits >> i & 1) as u8).collect();
            let e = EffFn::new(Chain::BOOLEAN, k, default_outcomes(m), table).ok()?;
            is_playable(&e).then_some(e)
        })
        .collect()
}

pub fn lifts(tables: &[EffFn], chain: Chain) -> Vec<EffFn> {
    tables.iter().map(|h| lift_unchecked(h, chain, DEFAULT_CELL_BUDGET).expect("small tables fit the budget")).collect()
}

/// Every game form with the given strategy counts per player (each `1..=max_strategies`)
/// and every outcome map into `m` outcomes.
pub fn game_forms(k: u32, max_strategies: u32, m: usize) -> Vec<GameForm> {
    let mut out = Vec::new();
    let mut shape = vec![1u32; k as usize];
    loop {
        let profiles: usize = shape.iter().map(|&s| s as usize).product();
        let mut map = vec![0usize; profiles];
        loop {
            out.push(GameForm::new(shape.clone(), default_outcomes(m), map.clone()).expect("valid by construction"));
            let Some(pos) = map.iter().rposition(|&o| o + 1 < m) else { break };
            map[pos] += 1;
            map[pos + 1..].iter_mut().for_each(|o| *o = 0);
        }
        let Some(pos) = shape.iter().rposition(|&s| s < max_strategies) else { break };
        shape[pos] += 1;
        shape[pos + 1..].iter_mut().for_each(|s| *s = 1);
    }
    out
}

/// Effectivity tables of game forms, with duplicate tables removed (first occurrence kept).
pub fn distinct_tables(forms: &[GameForm], chain: Chain) -> Vec<(GameForm, EffFn)> {
    let mut seen = HashSet::new();
    forms
        .iter()
        .filter_map(|g| {
            let e = effectivity_table(g, chain).ok()?;
            seen.insert(e.table().to_vec()).then(|| (g.clone(), e))
        })
        .collect()
}

pub fn random_game_form(rng: &mut impl Rng, k: u32, max_strategies: u32, m: usize) -> GameForm {
    let strategies: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=max_strategies)).collect();
    let profiles: usize = strategies.iter().map(|&s| s as usize).product();
    let map = (0..profiles).map(|_| rng.gen_range(0..m)).collect();
    GameForm::new(strategies, default_outcomes(m), map).expect("valid by construction")
}

/// The only playable table over a single outcome: `E(C, f) = f(s0)`.
pub fn single_outcome_table(chain: Chain, k: u32) -> EffFn {
    EffFn::from_fn(chain, k, default_outcomes(1), DEFAULT_CELL_BUDGET, |_, f| f as u8).expect("tiny table")
}

/// Draws playable tables. For two players and at most three outcomes the draw is uniform over
/// all playable tables; otherwise it is the table of a random game form.
#[derive(Default)]
pub struct PlayableSampler {
    cache: HashMap<(u32, usize, u8), Vec<EffFn>>,
}

impl PlayableSampler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn all(&mut self, chain: Chain, k: u32, m: usize) -> &[EffFn] {
        self.cache
            .entry((k, m, chain.n()))
            .or_insert_with(|| lifts(&boolean_playable_tables(k, m), chain))
    }

    pub fn sample(&mut self, rng: &mut impl Rng, chain: Chain, k: u32, m: usize) -> EffFn {
        if m == 1 {
            return single_outcome_table(chain, k);
        }
        if k == 2 && m <= 3 {
            let all = self.all(chain, k, m);
            return all[rng.gen_range(0..all.len())].clone();
        }
        effectivity_table(&random_game_form(rng, k, 3, m), chain).expect("small game forms fit the budget")
    }
}

pub fn state_names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("u{j}")).collect()
}

/// A random playable model with `m` states, values for `props` drawn uniformly.
pub fn random_model(
    sampler: &mut PlayableSampler,
    rng: &mut impl Rng,
    chain: Chain,
    k: u32,
    m: usize,
    props: &[u32],
) -> Model {
    let tables = (0..m).map(|_| sampler.sample(rng, chain, k, m)).collect();
    let frame = Frame::new(state_names(m), tables, None).expect("consistent shapes");
    let val = random_valuation(rng, chain, m, props);
    Model::new(frame, val).expect("valuation fits")
}

pub fn random_valuation(rng: &mut impl Rng, chain: Chain, m: usize, props: &[u32]) -> BTreeMap<u32, Vec<u8>> {
    props.iter().map(|&p| (p, (0..m).map(|_| rng.gen_range(0..=chain.n())).collect())).collect()
}

/// A random standard enriched model (playable tables, R the standard relation).
pub fn random_enriched_model(
    sampler: &mut PlayableSampler,
    rng: &mut impl Rng,
    chain: Chain,
    k: u32,
    m: usize,
    props: &[u32],
) -> Model {
    let m0 = random_model(sampler, rng, chain, k, m, props);
    Model::new(m0.frame.standardize(), m0.val).expect("same valuation")
}

/// A random kernel formula of depth at most `depth` over the given propositions.
pub fn random_formula(rng: &mut impl Rng, depth: u32, k: u32, props: &[u32], with_box_o: bool) -> Formula {
    if depth <= 1 || rng.gen_bool(0.2) {
        let i = rng.gen_range(0..=props.len());
        return if i == props.len() { Formula::top() } else { Formula::prop(props[i]) };
    }
    let kinds = if with_box_o { 4 } else { 3 };
    match rng.gen_range(0..kinds) {
        0 => random_formula(rng, depth - 1, k, props, with_box_o).neg(),
        1 => {
            let a = random_formula(rng, depth - 1, k, props, with_box_o);
            a.implies(&random_formula(rng, depth - 1, k, props, with_box_o))
        }
        2 => random_formula(rng, depth - 1, k, props, with_box_o).boxed(Coalition(rng.gen_range(0..1 << k))),
        _ => random_formula(rng, depth - 1, k, props, with_box_o).box_o(),
    }
}

/// A table with every cell drawn uniformly from Łn.
pub fn random_table(rng: &mut impl Rng, chain: Chain, k: u32, m: usize) -> EffFn {
    EffFn::from_fn(chain, k, default_outcomes(m), DEFAULT_CELL_BUDGET, |_, _| rng.gen_range(0..=chain.n()))
        .expect("small tables fit the budget")
}

/// The same table with one cell changed to a different value.
pub fn mutate_cell(rng: &mut impl Rng, e: &EffFn) -> EffFn {
    let target = rng.gen_range(0..e.table().len());
    let n = e.chain().n();
    let shift = rng.gen_range(1..=n);
    let mut index = 0;
    e.map_cells(|_, _, v| {
        let out = if index == target { (v + shift) % (n + 1) } else { v };
        index += 1;
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effectivity::{boolean_skeleton, is_truly_playable};

    #[test]
    fn upset_counts() {
        // Monotone Boolean functions of 0, 1, 2 variables: 3, 3, 6 (including the empty family).
        assert_eq!(upsets(0).len(), 2);
        assert_eq!(upsets(1).len(), 3);
        assert_eq!(upsets(2).len(), 6);
        assert_eq!(upsets_filtered(3, |_| true).len(), 20);
    }

    #[test]
    fn generator_matches_brute_force() {
        let mut smart: Vec<Vec<u8>> = boolean_playable_tables(2, 2).iter().map(|e| e.table().to_vec()).collect();
        let mut brute: Vec<Vec<u8>> = boolean_playable_tables_brute(2, 2).iter().map(|e| e.table().to_vec()).collect();
        smart.sort();
        brute.sort();
        assert_eq!(smart, brute);
        assert!(!smart.is_empty());
        let mut one: Vec<Vec<u8>> = boolean_playable_tables(2, 1).iter().map(|e| e.table().to_vec()).collect();
        let mut one_brute: Vec<Vec<u8>> =
            boolean_playable_tables_brute(2, 1).iter().map(|e| e.table().to_vec()).collect();
        one.sort();
        one_brute.sort();
        assert_eq!(one, one_brute);
        assert_eq!(one, vec![single_outcome_table(Chain::BOOLEAN, 2).table().to_vec()]);
    }

    #[test]
    fn game_forms_realize_every_generated_table() {
        // Every playable table on two outcomes is the table of some form with at most 3 strategies each.
        let realized: HashSet<Vec<u8>> = distinct_tables(&game_forms(2, 3, 2), Chain::BOOLEAN)
            .into_iter()
            .map(|(_, e)| e.table().to_vec())
            .collect();
        for h in boolean_playable_tables(2, 2) {
            assert!(realized.contains(h.table()));
        }
    }

    #[test]
    fn random_models_are_playable() {
        let mut sampler = PlayableSampler::new();
        let mut r = rng(7);
        for m in 1..=4 {
            let model = random_model(&mut sampler, &mut r, Chain::new(2).unwrap(), 2, m, &[1, 2]);
            assert!(model.frame.is_truly_playable());
        }
        let e = sampler.sample(&mut r, Chain::new(2).unwrap(), 3, 2);
        assert!(is_truly_playable(&e));
        assert!(boolean_skeleton(&e).is_ok());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_formula(&mut rng(3), 5, 2, &[1, 2], true);
        let b = random_formula(&mut rng(3), 5, 2, &[1, 2], true);
        assert_eq!(a, b);
        let t = random_table(&mut rng(1), Chain::new(2).unwrap(), 2, 2);
        let mutated = mutate_cell(&mut rng(2), &t);
        assert_eq!(t.table().iter().zip(mutated.table()).filter(|(x, y)| x != y).count(), 1);
    }
}

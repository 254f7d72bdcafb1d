use proptest::prelude::*;
use proptest::test_runner::Config;

use mvcoal::corpus::{
    boolean_playable_tables, random_formula, random_game_form, random_model, random_table, rng, PlayableSampler,
    SeedableRng,
};
use mvcoal::decision::{search_countermodel, DecisionStatus, SearchConfig};
use mvcoal::effectivity::{
    boolean_skeleton, is_playable, is_truly_playable, lift_boolean, one_set, playability_report, EffFn, Property,
};
use mvcoal::game_form::{boolean_effectivity, effectivity_table};
use mvcoal::mv::{is_mv_filter, Chain, MvAlgebra};
use mvcoal::semantics::{check_axiom_schema, Frame, Logic, Schema};
use mvcoal::syntax::Coalition;

fn config(cases: u32) -> Config {
    Config { cases, failure_persistence: None, ..Config::default() }
}

fn chain(n: u32) -> Chain {
    Chain::new(n).unwrap()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn chain_operations_match_real_arithmetic(n in 1u32..=255, a in 0u32..=255, b in 0u32..=255) {
        let c = chain(n);
        let (a, b) = ((a % (n + 1)) as u8, (b % (n + 1)) as u8);
        let (x, y) = (a as i64, b as i64);
        let n = n as i64;
        prop_assert_eq!(c.oplus(a, b) as i64, (x + y).min(n));
        prop_assert_eq!(c.odot(a, b) as i64, (x + y - n).max(0));
        prop_assert_eq!(c.implies(a, b) as i64, (n - x + y).min(n));
        prop_assert_eq!(c.neg(c.oplus(c.neg(a), c.neg(b))), c.odot(a, b));
        prop_assert_eq!(c.tau_oplus(a), c.oplus(a, a));
        prop_assert_eq!(c.tau_odot(a), c.odot(a, a));
    }
}

proptest! {
    #![proptest_config(config(48))]

    /// Game-form tables: truly playable, skeleton equals the Boolean α-effectivity,
    /// and lifting the skeleton gives the table back.
    #[test]
    fn game_form_tables(seed in any::<u64>(), k in 2u32..=3, m in 2usize..=3, n in 1u32..=3) {
        let g = random_game_form(&mut rng(seed), k, 3, m);
        let e = effectivity_table(&g, chain(n)).unwrap();
        prop_assert!(is_truly_playable(&e));
        let h = boolean_skeleton(&e).unwrap();
        for c in Coalition::all(k) {
            for x in 0..1u64 << m {
                prop_assert_eq!(h.get(c, x as usize) == 1, boolean_effectivity(&g, c, x));
            }
        }
        prop_assert_eq!(lift_boolean(&h, chain(n)).unwrap(), e.clone());
        // The ∅ 1-set is an MV-filter; every 1-set is upward closed and closed under squaring.
        if m == 2 && n <= 2 {
            let algebra = MvAlgebra::power(chain(n), m);
            prop_assert!(is_mv_filter(&one_set(&e, Coalition::EMPTY, &algebra)));
            for c in Coalition::all(k) {
                let ones = one_set(&e, c, &algebra).elements();
                for &x in &ones {
                    prop_assert!(ones.contains(&algebra.odot(x, x)));
                    for y in 0..algebra.size() {
                        prop_assert!(!algebra.leq(x, y) || ones.contains(&y));
                    }
                }
            }
        }
    }

    /// A random (almost never playable) table: the report is internally consistent.
    #[test]
    fn report_conjunctions(seed in any::<u64>(), n in 1u32..=3, m in 1usize..=2) {
        let e = random_table(&mut rng(seed), chain(n), 2, m);
        let r = playability_report(&e);
        let h = |p| r.get(p).holds;
        let playable = h(Property::OutcomeMonotonic) && h(Property::NMaximal) && h(Property::Superadditive)
            && h(Property::Homogeneous) && h(Property::Liveness) && h(Property::Safety);
        prop_assert_eq!(h(Property::Playable), playable);
        prop_assert_eq!(h(Property::TrulyPlayable), playable && h(Property::Principal));
        prop_assert_eq!(is_playable(&e), playable);
        for p in Property::ALL {
            prop_assert_eq!(r.get(p).witness.is_some(), !r.get(p).holds);
        }
    }

    /// The ⊕/⊙ homogeneity schemata imply the threshold schemata on any frame.
    #[test]
    fn doubling_schemata_imply_thresholds(seed in any::<u64>(), n in 2u32..=3, m in 1usize..=2) {
        let mut r = rng(seed);
        let e = random_table(&mut r, chain(n), 2, m);
        let names = (0..m).map(|j| format!("s{j}")).collect();
        let frame = Frame::new(names, vec![e; m], None).unwrap();
        for c in Coalition::all(2) {
            let doubling = check_axiom_schema(&frame, Schema::OdotHomogeneity(c)).unwrap().is_none()
                && check_axiom_schema(&frame, Schema::OplusHomogeneity(c)).unwrap().is_none();
            if doubling {
                for i in 1..=n {
                    prop_assert!(check_axiom_schema(&frame, Schema::Threshold(c, i)).unwrap().is_none());
                }
            }
        }
    }

    /// Type elimination agrees with direct evaluation: theorems hold in random
    /// playable models, and reported countermodels falsify the formula.
    #[test]
    fn decision_agrees_with_models(seed in any::<u64>(), n in 1u32..=2) {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let phi = random_formula(&mut r, 3, 2, &[1], false);
        let config = SearchConfig { max_states: u64::MAX, explicit_budget: 0, ..SearchConfig::default() };
        let verdict = search_countermodel(&phi, Logic::Pn, chain(n), 2, &config).unwrap();
        match verdict.status {
            DecisionStatus::TheoremByFiltrationBound { .. } => {
                let mut sampler = PlayableSampler::new();
                for m in 1..=3 {
                    let model = random_model(&mut sampler, &mut r, chain(n), 2, m, &[1]);
                    prop_assert!(model.is_true(&phi).unwrap(), "{} fails in a random model", phi);
                }
            }
            DecisionStatus::CountermodelFound { model, state, value } => {
                prop_assert!(model.frame.is_truly_playable());
                prop_assert_eq!(model.eval(state, &phi).unwrap().num(), value);
                prop_assert!(value < n as u8);
            }
            DecisionStatus::NoCountermodelUpToBound { .. } => prop_assert!(false, "unbounded search must decide"),
        }
    }
}

#[test]
fn one_sets_of_nonempty_coalitions_need_not_be_filters() {
    // Player 1 alone picks the outcome: {a} and {b} are forcible, their meet is not.
    let g = mvcoal::game_form::GameForm::new(vec![2, 1], mvcoal::effectivity::default_outcomes(2), vec![0, 1]).unwrap();
    let e = effectivity_table(&g, Chain::BOOLEAN).unwrap();
    let algebra = MvAlgebra::power(Chain::BOOLEAN, 2);
    assert!(is_truly_playable(&e));
    assert!(!is_mv_filter(&one_set(&e, Coalition::from_players([1]), &algebra)));
    assert!(is_mv_filter(&one_set(&e, Coalition::EMPTY, &algebra)));
}

#[test]
fn playable_tables_are_regular_and_coalition_monotonic() {
    let mut corpus: Vec<EffFn> = Vec::new();
    for n in 1..=3 {
        corpus.extend(mvcoal::corpus::lifts(&boolean_playable_tables(2, 3), chain(n)));
        corpus.extend(mvcoal::corpus::lifts(&boolean_playable_tables(3, 2), chain(n)));
        let forms = mvcoal::corpus::game_forms(3, 2, 3);
        corpus.extend(mvcoal::corpus::distinct_tables(&forms[..forms.len().min(400)], chain(n)).into_iter().map(|(_, e)| e));
    }
    for e in &corpus {
        let r = playability_report(e);
        let h = |p| r.get(p).holds;
        assert!(h(Property::Playable));
        assert!(h(Property::Regular) && h(Property::CoalitionMonotonic) && h(Property::Principal));
        assert!(h(Property::SemiPlayable) && h(Property::Homogeneous) && h(Property::NMaximal));
    }
}

#[test]
fn lifts_of_playable_tables_are_truly_playable() {
    for m in 1..=3 {
        for h in boolean_playable_tables(2, m) {
            for n in 1..=3 {
                let e: EffFn = lift_boolean(&h, chain(n)).unwrap();
                assert!(is_truly_playable(&e));
                assert_eq!(boolean_skeleton(&e).unwrap(), h);
            }
        }
    }
}

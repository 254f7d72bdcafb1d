use super::{check_property, EffFn, EffectivityError, FnSpace, Property, DEFAULT_CELL_BUDGET};
use crate::mv::Chain;

/// `E(C, f) = max{i/n | H(C, τ_{i/n}(f)) = 1}`, with the empty maximum read as 0.
///
/// Requires a playable Boolean `H`.
pub fn lift_boolean(h: &EffFn, chain: Chain) -> Result<EffFn, EffectivityError> {
    if h.chain() != Chain::BOOLEAN {
        return Err(EffectivityError::Shape(format!("lifting expects a Boolean table, got {}", h.chain())));
    }
    for p in [
        Property::OutcomeMonotonic,
        Property::NMaximal,
        Property::Superadditive,
        Property::Liveness,
        Property::Safety,
    ] {
        if !check_property(h, p).holds {
            return Err(EffectivityError::NotPlayableInput(p));
        }
    }
    let e = lift_unchecked(h, chain, DEFAULT_CELL_BUDGET)?;
    debug_assert!(check_property(&e, Property::Playable).holds);
    debug_assert_eq!(super::boolean_skeleton(&e).as_ref(), Ok(h));
    Ok(e)
}

/// The lifting formula applied to any Boolean table, without checking its premise.
pub fn lift_unchecked(h: &EffFn, chain: Chain, budget: u64) -> Result<EffFn, EffectivityError> {
    let n = chain.n();
    let sets = 1usize << h.space().len();
    let space = FnSpace::new(chain, h.space().len(), budget >> h.players())?;
    EffFn::from_fn(chain, h.players(), h.outcomes().to_vec(), budget, |c, f| {
        let row = &h.row(c)[..sets];
        (1..=n).rev().find(|&i| row[space.upper_set(f, i) as usize] == 1).unwrap_or(0)
    })
}

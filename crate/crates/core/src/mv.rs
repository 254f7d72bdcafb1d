//! Exact arithmetic on the finite Łukasiewicz chains Łn = {0, 1/n, ..., 1}.
//!
//! A truth value is stored as its numerator together with the chain it lives
//! in. Effectivity tables and valuations store bare `u8` numerators and use
//! the raw operations on [`Chain`] directly; [`TruthValue`] is the checked,
//! chain-aware face of the same arithmetic.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MvError {
    #[error("chain index must satisfy 1 <= n <= 255, got {0}")]
    InvalidChain(u32),
    #[error("cannot combine a value of Ł{left} with a value of Ł{right}")]
    ChainMismatch { left: u8, right: u8 },
    #[error("numerator {num} is not an element of Ł{n}")]
    ValueOutOfRange { num: u32, n: u8 },
    #[error("threshold index {i} must lie in 1..={n}")]
    IndexOutOfRange { i: u32, n: u8 },
    #[error("{0} is not in the unit interval")]
    OutOfUnitInterval(Ratio<i64>),
    #[error("not an MV-algebra: {0}")]
    NotAnAlgebra(String),
}

/// The chain Łn, identified by `n` (it has `n + 1` elements).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Chain(u8);

impl TryFrom<u32> for Chain {
    type Error = MvError;

    fn try_from(n: u32) -> Result<Self, MvError> {
        Chain::new(n)
    }
}

impl From<Chain> for u32 {
    fn from(c: Chain) -> u32 {
        c.0 as u32
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ł{}", self.0)
    }
}

impl Chain {
    pub fn new(n: u32) -> Result<Self, MvError> {
        if n == 0 || n > u8::MAX as u32 {
            return Err(MvError::InvalidChain(n));
        }
        Ok(Chain(n as u8))
    }

    /// The Boolean chain Ł1.
    pub const BOOLEAN: Chain = Chain(1);

    #[inline]
    pub fn n(self) -> u8 {
        self.0
    }

    /// Number of elements, `n + 1`.
    #[inline]
    pub fn size(self) -> usize {
        self.0 as usize + 1
    }

    pub fn value(self, num: u32) -> Result<TruthValue, MvError> {
        if num > self.0 as u32 {
            return Err(MvError::ValueOutOfRange { num, n: self.0 });
        }
        Ok(TruthValue { num: num as u8, chain: self })
    }

    pub fn top(self) -> TruthValue {
        TruthValue { num: self.0, chain: self }
    }

    pub fn bottom(self) -> TruthValue {
        TruthValue { num: 0, chain: self }
    }

    pub fn values(self) -> impl Iterator<Item = TruthValue> {
        (0..=self.0).map(move |num| TruthValue { num, chain: self })
    }

    // Raw numerator arithmetic. Callers guarantee arguments are <= n.

    #[inline]
    pub fn oplus(self, a: u8, b: u8) -> u8 {
        (a as u16 + b as u16).min(self.0 as u16) as u8
    }

    #[inline]
    pub fn odot(self, a: u8, b: u8) -> u8 {
        (a as u16 + b as u16).saturating_sub(self.0 as u16) as u8
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        self.0 - a
    }

    #[inline]
    pub fn implies(self, a: u8, b: u8) -> u8 {
        (self.0 as u16 - a as u16 + b as u16).min(self.0 as u16) as u8
    }

    #[inline]
    pub fn iff(self, a: u8, b: u8) -> u8 {
        self.0 - a.abs_diff(b)
    }

    #[inline]
    pub fn tau_oplus(self, a: u8) -> u8 {
        self.oplus(a, a)
    }

    #[inline]
    pub fn tau_odot(self, a: u8) -> u8 {
        self.odot(a, a)
    }

    /// `τ_{i/n}` on a raw numerator: top iff `a >= i`.
    #[inline]
    pub fn threshold(self, i: u8, a: u8) -> u8 {
        if a >= i {
            self.0
        } else {
            0
        }
    }

    /// `⊙^k a`, the k-fold Łukasiewicz product (`k = 0` gives top).
    pub fn odot_power(self, a: u8, k: u32) -> u8 {
        (0..k).fold(self.0, |acc, _| self.odot(acc, a))
    }

    /// `⊕^k a`, the k-fold truncated sum (`k = 0` gives bottom).
    pub fn oplus_power(self, a: u8, k: u32) -> u8 {
        (0..k).fold(0, |acc, _| self.oplus(acc, a))
    }

    pub fn is_idempotent(self, a: u8) -> bool {
        self.oplus(a, a) == a
    }
}

/// An element `num/n` of a chain Łn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthValue {
    num: u8,
    chain: Chain,
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.num {
            0 => write!(f, "0"),
            x if x == self.chain.0 => write!(f, "1"),
            x => write!(f, "{}/{}", x, self.chain.0),
        }
    }
}

impl PartialOrd for TruthValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        (self.chain == other.chain).then(|| self.num.cmp(&other.num))
    }
}

impl TruthValue {
    #[inline]
    pub fn num(self) -> u8 {
        self.num
    }

    #[inline]
    pub fn chain(self) -> Chain {
        self.chain
    }

    pub fn as_ratio(self) -> Ratio<i64> {
        Ratio::new(self.num as i64, self.chain.0 as i64)
    }

    pub fn is_top(self) -> bool {
        self.num == self.chain.0
    }

    fn same_chain(self, other: TruthValue) -> Result<Chain, MvError> {
        if self.chain != other.chain {
            return Err(MvError::ChainMismatch { left: self.chain.0, right: other.chain.0 });
        }
        Ok(self.chain)
    }

    fn binary(self, other: TruthValue, op: fn(Chain, u8, u8) -> u8) -> Result<TruthValue, MvError> {
        let chain = self.same_chain(other)?;
        Ok(TruthValue { num: op(chain, self.num, other.num), chain })
    }

    /// `min(x + y, 1)`
    pub fn oplus(self, other: TruthValue) -> Result<TruthValue, MvError> {
        self.binary(other, Chain::oplus)
    }

    /// `max(x + y - 1, 0)`
    pub fn odot(self, other: TruthValue) -> Result<TruthValue, MvError> {
        self.binary(other, Chain::odot)
    }

    /// `min(1, 1 - x + y)`
    pub fn implies(self, other: TruthValue) -> Result<TruthValue, MvError> {
        self.binary(other, Chain::implies)
    }

    /// `1 - |x - y|`
    pub fn iff(self, other: TruthValue) -> Result<TruthValue, MvError> {
        self.binary(other, Chain::iff)
    }

    pub fn meet(self, other: TruthValue) -> Result<TruthValue, MvError> {
        self.binary(other, |_, a, b| a.min(b))
    }

    pub fn join(self, other: TruthValue) -> Result<TruthValue, MvError> {
        self.binary(other, |_, a, b| a.max(b))
    }

    pub fn neg(self) -> TruthValue {
        TruthValue { num: self.chain.neg(self.num), chain: self.chain }
    }
}

/// The threshold map `τ_{i/n}`: 1 on `x >= i/n`, 0 below.
pub fn tau_threshold(i: u32, x: TruthValue) -> Result<TruthValue, MvError> {
    let chain = x.chain;
    if i == 0 || i > chain.0 as u32 {
        return Err(MvError::IndexOutOfRange { i, n: chain.0 });
    }
    Ok(TruthValue { num: chain.threshold(i as u8, x.num), chain })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TauOp {
    /// `x ↦ x ⊕ x`
    TauOplus,
    /// `x ↦ x ⊙ x`
    TauOdot,
}

impl TauOp {
    #[inline]
    pub fn apply(self, chain: Chain, a: u8) -> u8 {
        match self {
            TauOp::TauOplus => chain.tau_oplus(a),
            TauOp::TauOdot => chain.tau_odot(a),
        }
    }
}

/// A composite of doubling maps, applied left to right. The empty term is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TauTerm {
    pub ops: Vec<TauOp>,
}

impl TauTerm {
    pub fn eval(&self, chain: Chain, a: u8) -> u8 {
        self.ops.iter().fold(a, |acc, op| op.apply(chain, acc))
    }

    pub fn eval_value(&self, x: TruthValue) -> TruthValue {
        TruthValue { num: self.eval(x.chain, x.num), chain: x.chain }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Finds a shortest composite of `τ⊕`/`τ⊙` whose function table on Łn is `τ_{i/n}`.
///
/// Breadth-first over function tables (deduplicated), so the search terminates
/// and the returned term has minimal length.
pub fn synthesize_tau_term(chain: Chain, i: u32) -> Result<TauTerm, MvError> {
    if i == 0 || i > chain.0 as u32 {
        return Err(MvError::IndexOutOfRange { i, n: chain.0 });
    }
    let target: Vec<u8> = (0..=chain.0).map(|a| chain.threshold(i as u8, a)).collect();
    let identity: Vec<u8> = (0..=chain.0).collect();

    let mut parent: HashMap<Vec<u8>, Option<(Vec<u8>, TauOp)>> = HashMap::new();
    parent.insert(identity.clone(), None);
    let mut queue = VecDeque::from([identity]);
    while let Some(table) = queue.pop_front() {
        if table == target {
            let mut ops = Vec::new();
            let mut cur = table;
            while let Some(Some((prev, op))) = parent.get(&cur) {
                ops.push(*op);
                cur = prev.clone();
            }
            ops.reverse();
            return Ok(TauTerm { ops });
        }
        for op in [TauOp::TauOplus, TauOp::TauOdot] {
            let next: Vec<u8> = table.iter().map(|&a| op.apply(chain, a)).collect();
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((table.clone(), op)));
                queue.push_back(next);
            }
        }
    }
    unreachable!("threshold maps are always composites of the doubling maps")
}

/// `min{a ∈ Łn | a >= r}`.
pub fn ceil_to_chain(r: Ratio<i64>, chain: Chain) -> Result<TruthValue, MvError> {
    if r < Ratio::from_integer(0) || r > Ratio::from_integer(1) {
        return Err(MvError::OutOfUnitInterval(r));
    }
    let scaled = r * Ratio::from_integer(chain.0 as i64);
    Ok(TruthValue { num: scaled.ceil().to_integer() as u8, chain })
}

/// Checks both Grigolia identities on every element of Łn:
/// `⊙^n x = ⊙^{n+1} x`, and for `1 < m < n` not dividing n,
/// `(n+1)·x^m = (m·x^{m-1})^{n+1}`.
pub fn check_grigolia(chain: Chain) -> bool {
    let n = chain.0 as u32;
    (0..=chain.0).all(|x| {
        let first = chain.odot_power(x, n) == chain.odot_power(x, n + 1);
        let second = (2..n).filter(|m| !n.is_multiple_of(*m)).all(|m| {
            let lhs = chain.oplus_power(chain.odot_power(x, m), n + 1);
            let inner = chain.oplus_power(chain.odot_power(x, m - 1), m);
            lhs == chain.odot_power(inner, n + 1)
        });
        first && second
    })
}

/// A finite MV-algebra given by explicit operation tables on `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MvAlgebra {
    size: usize,
    oplus: Vec<usize>,
    neg: Vec<usize>,
    zero: usize,
    /// The n of the variety MV_n the algebra belongs to; principal filters use `⊙^n`.
    rank: u32,
}

impl MvAlgebra {
    /// Validates closure of the tables and the MV-algebra equations.
    pub fn from_tables(oplus: Vec<Vec<usize>>, neg: Vec<usize>, zero: usize, rank: u32) -> Result<Self, MvError> {
        let size = neg.len();
        if size == 0 {
            return Err(MvError::NotAnAlgebra("empty carrier".into()));
        }
        if oplus.len() != size || oplus.iter().any(|row| row.len() != size) {
            return Err(MvError::NotAnAlgebra("⊕ table is not square over the carrier".into()));
        }
        if zero >= size || neg.iter().chain(oplus.iter().flatten()).any(|&e| e >= size) {
            return Err(MvError::NotAnAlgebra("operation tables are not closed".into()));
        }
        let alg = MvAlgebra { size, oplus: oplus.into_iter().flatten().collect(), neg, zero, rank };
        alg.check_axioms()?;
        Ok(alg)
    }

    /// The chain Łn itself; element `a` is the numerator `a`.
    pub fn chain(chain: Chain) -> Self {
        Self::power(chain, 1)
    }

    /// The product algebra Łn^m with elements encoded as base-(n+1) integers,
    /// coordinate `j` carrying weight `(n+1)^j`.
    pub fn power(chain: Chain, m: usize) -> Self {
        let base = chain.size();
        let size = base.pow(m as u32);
        let digits = |mut c: usize| {
            let mut v = Vec::with_capacity(m);
            for _ in 0..m {
                v.push((c % base) as u8);
                c /= base;
            }
            v
        };
        let encode = |v: &[u8]| v.iter().rev().fold(0usize, |acc, &d| acc * base + d as usize);
        let decoded: Vec<Vec<u8>> = (0..size).map(digits).collect();
        let mut oplus = Vec::with_capacity(size * size);
        for a in &decoded {
            for b in &decoded {
                let s: Vec<u8> = a.iter().zip(b).map(|(&x, &y)| chain.oplus(x, y)).collect();
                oplus.push(encode(&s));
            }
        }
        let neg = decoded
            .iter()
            .map(|a| encode(&a.iter().map(|&x| chain.neg(x)).collect::<Vec<_>>()))
            .collect();
        MvAlgebra { size, oplus, neg, zero: 0, rank: chain.n() as u32 }
    }

    fn check_axioms(&self) -> Result<(), MvError> {
        let all = 0..self.size;
        for x in all.clone() {
            if self.oplus(x, self.zero) != x {
                return Err(MvError::NotAnAlgebra(format!("0 is not neutral for {x}")));
            }
            if self.neg(self.neg(x)) != x {
                return Err(MvError::NotAnAlgebra(format!("¬¬{x} ≠ {x}")));
            }
            if self.oplus(self.one(), x) != self.one() {
                return Err(MvError::NotAnAlgebra(format!("¬0 ⊕ {x} ≠ ¬0")));
            }
            for y in all.clone() {
                if self.oplus(x, y) != self.oplus(y, x) {
                    return Err(MvError::NotAnAlgebra(format!("⊕ not commutative at ({x},{y})")));
                }
                let l = self.oplus(self.neg(self.oplus(self.neg(x), y)), y);
                let r = self.oplus(self.neg(self.oplus(self.neg(y), x)), x);
                if l != r {
                    return Err(MvError::NotAnAlgebra(format!("Łukasiewicz axiom fails at ({x},{y})")));
                }
                for z in all.clone() {
                    if self.oplus(self.oplus(x, y), z) != self.oplus(x, self.oplus(y, z)) {
                        return Err(MvError::NotAnAlgebra(format!("⊕ not associative at ({x},{y},{z})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn one(&self) -> usize {
        self.neg[self.zero]
    }

    pub fn oplus(&self, x: usize, y: usize) -> usize {
        self.oplus[x * self.size + y]
    }

    pub fn neg(&self, x: usize) -> usize {
        self.neg[x]
    }

    pub fn odot(&self, x: usize, y: usize) -> usize {
        self.neg(self.oplus(self.neg(x), self.neg(y)))
    }

    pub fn implies(&self, x: usize, y: usize) -> usize {
        self.oplus(self.neg(x), y)
    }

    /// `x <= y` iff `x → y = 1`.
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.implies(x, y) == self.one()
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        self.oplus(self.neg(self.oplus(self.neg(x), y)), y)
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.neg(self.join(self.neg(x), self.neg(y)))
    }
}

/// A candidate filter: a subset of a finite MV-algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MvFilterView<'a> {
    pub algebra: &'a MvAlgebra,
    pub members: Vec<bool>,
}

impl<'a> MvFilterView<'a> {
    pub fn from_elements(algebra: &'a MvAlgebra, elements: impl IntoIterator<Item = usize>) -> Self {
        let mut members = vec![false; algebra.size()];
        for e in elements {
            members[e] = true;
        }
        MvFilterView { algebra, members }
    }

    pub fn elements(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&e| self.members[e]).collect()
    }
}

/// Contains 1, closed under ⊙, upward closed.
pub fn is_mv_filter(view: &MvFilterView<'_>) -> bool {
    let alg = view.algebra;
    if view.members.len() != alg.size() || !view.members[alg.one()] {
        return false;
    }
    let elems = view.elements();
    for &x in &elems {
        for &y in &elems {
            if !view.members[alg.odot(x, y)] {
                return false;
            }
        }
        for y in 0..alg.size() {
            if alg.leq(x, y) && !view.members[y] {
                return false;
            }
        }
    }
    true
}

/// `{y | y >= ⊙^rank x}`, the filter generated by `x` in a finite algebra of MV_rank.
pub fn principal_filter(algebra: &MvAlgebra, x: usize) -> MvFilterView<'_> {
    let generator = (0..algebra.rank()).fold(algebra.one(), |acc, _| algebra.odot(acc, x));
    let members = (0..algebra.size()).map(|y| algebra.leq(generator, y)).collect();
    MvFilterView { algebra, members }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(chain: Chain, num: u32) -> TruthValue {
        chain.value(num).unwrap()
    }

    #[test]
    fn operation_examples() {
        let l2 = Chain::new(2).unwrap();
        assert_eq!(v(l2, 1).oplus(v(l2, 1)).unwrap(), l2.top());
        let l3 = Chain::new(3).unwrap();
        assert_eq!(v(l3, 2).odot(v(l3, 2)).unwrap(), v(l3, 1));
        for n in 1..=6 {
            let c = Chain::new(n).unwrap();
            for x in c.values() {
                assert_eq!(x.oplus(c.bottom()).unwrap(), x);
            }
        }
    }

    #[test]
    fn mixed_chains_are_rejected() {
        let a = Chain::new(2).unwrap().top();
        let b = Chain::new(3).unwrap().top();
        assert_eq!(a.oplus(b), Err(MvError::ChainMismatch { left: 2, right: 3 }));
        assert!(a.partial_cmp(&b).is_none());
    }

    #[test]
    fn invalid_chain_and_values() {
        assert!(Chain::new(0).is_err());
        assert!(Chain::new(256).is_err());
        assert!(Chain::new(2).unwrap().value(3).is_err());
    }

    #[test]
    fn threshold_examples() {
        let l2 = Chain::new(2).unwrap();
        assert_eq!(tau_threshold(1, v(l2, 1)).unwrap(), l2.top());
        assert_eq!(tau_threshold(2, v(l2, 1)).unwrap(), l2.bottom());
        let l4 = Chain::new(4).unwrap();
        assert_eq!(tau_threshold(3, v(l4, 2)).unwrap(), l4.bottom());
        assert_eq!(tau_threshold(0, v(l4, 2)), Err(MvError::IndexOutOfRange { i: 0, n: 4 }));
        assert_eq!(tau_threshold(5, v(l4, 2)), Err(MvError::IndexOutOfRange { i: 5, n: 4 }));
    }

    #[test]
    fn tau_term_examples() {
        assert!(synthesize_tau_term(Chain::BOOLEAN, 1).unwrap().is_empty());
        let l2 = Chain::new(2).unwrap();
        assert_eq!(synthesize_tau_term(l2, 1).unwrap().ops, vec![TauOp::TauOplus]);
        assert_eq!(synthesize_tau_term(l2, 2).unwrap().ops, vec![TauOp::TauOdot]);

        // Brute force over all compositions of length <= 3: none of length < 3
        // realizes τ_{2/3}, and the synthesized term has length 3.
        let l3 = Chain::new(3).unwrap();
        let target: Vec<u8> = (0..=3).map(|a| l3.threshold(2, a)).collect();
        let mut shortest = None;
        'outer: for len in 0..=3u32 {
            for bits in 0..(1u32 << len) {
                let ops: Vec<TauOp> = (0..len)
                    .map(|k| if bits >> k & 1 == 0 { TauOp::TauOplus } else { TauOp::TauOdot })
                    .collect();
                let term = TauTerm { ops };
                if (0..=3).map(|a| term.eval(l3, a)).collect::<Vec<_>>() == target {
                    shortest = Some(len);
                    break 'outer;
                }
            }
        }
        let synthesized = synthesize_tau_term(l3, 2).unwrap();
        assert_eq!(Some(synthesized.len() as u32), shortest);
        assert!((0..=3).all(|a| synthesized.eval(l3, a) == target[a as usize]));
        assert!(synthesize_tau_term(l3, 4).is_err());
    }

    #[test]
    fn ceiling_examples() {
        let l2 = Chain::new(2).unwrap();
        assert_eq!(ceil_to_chain(Ratio::new(1, 4), l2).unwrap(), v(l2, 1));
        let l3 = Chain::new(3).unwrap();
        assert_eq!(ceil_to_chain(Ratio::from_integer(1), l3).unwrap(), l3.top());
        let l4 = Chain::new(4).unwrap();
        // Enumerate Ł4 for the least element >= 3/8.
        let expected = l4.values().find(|x| x.as_ratio() >= Ratio::new(3, 8)).unwrap();
        assert_eq!(ceil_to_chain(Ratio::new(3, 8), l4).unwrap(), expected);
        assert_eq!(expected, v(l4, 2));
        assert!(ceil_to_chain(Ratio::new(5, 4), l4).is_err());
        assert!(ceil_to_chain(Ratio::new(-1, 4), l4).is_err());
    }

    #[test]
    fn filter_examples() {
        let l2 = Chain::new(2).unwrap();
        let alg = MvAlgebra::chain(l2);
        assert!(is_mv_filter(&MvFilterView::from_elements(&alg, [2])));
        let principal = principal_filter(&alg, 1);
        assert_eq!(principal.elements(), vec![0, 1, 2]);
        assert!(is_mv_filter(&principal));
        assert!(!is_mv_filter(&MvFilterView::from_elements(&alg, [1, 2])));
        assert!(!is_mv_filter(&MvFilterView::from_elements(&alg, [0])));
    }

    #[test]
    fn malformed_tables_are_not_algebras() {
        let open = MvAlgebra::from_tables(vec![vec![0, 1], vec![1, 7]], vec![1, 0], 0, 1);
        assert!(matches!(open, Err(MvError::NotAnAlgebra(_))));
        // Closed but ⊕ = projection, not commutative.
        let bad = MvAlgebra::from_tables(vec![vec![0, 0], vec![1, 1]], vec![1, 0], 0, 1);
        assert!(matches!(bad, Err(MvError::NotAnAlgebra(_))));
        let l1 = MvAlgebra::from_tables(vec![vec![0, 1], vec![1, 1]], vec![1, 0], 0, 1).unwrap();
        assert_eq!(l1, MvAlgebra::chain(Chain::BOOLEAN));
    }

    #[test]
    fn grigolia_examples() {
        for n in [1, 2, 5] {
            assert!(check_grigolia(Chain::new(n).unwrap()));
        }
    }
}

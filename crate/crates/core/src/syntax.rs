//! Formulas of the coalition languages L and L⁺.
//!
//! The kernel AST has the five constructors 1, p, ¬, →, [C] plus [O] for L⁺.
//! Everything else (0, ⊕, ⊙, ∧, ∨, ↔, n.φ, τ_{i/n}) is desugared at parse time
//! into kernel nodes. Subtrees are reference counted, so a desugaring that
//! mentions an argument twice shares one node rather than copying it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::mv::{synthesize_tau_term, Chain, TauOp};

/// Largest supported player count. Tables are indexed by coalition bitmask.
pub const MAX_PLAYERS: u32 = 16;

/// A set of players from N = {1, ..., k} as a bitmask (bit `i - 1` for player `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn grand(k: u32) -> Coalition {
        Coalition(((1u64 << k) - 1) as u32)
    }

    pub fn from_players(players: impl IntoIterator<Item = u32>) -> Coalition {
        Coalition(players.into_iter().fold(0, |m, p| m | 1 << (p - 1)))
    }

    #[inline]
    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn complement(self, k: u32) -> Coalition {
        Coalition(!self.0 & Coalition::grand(k).0)
    }

    pub fn contains(self, player: u32) -> bool {
        player >= 1 && self.0 >> (player - 1) & 1 == 1
    }

    pub fn is_subset(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Coalition) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    /// Players in increasing order, 1-based.
    pub fn players(self) -> impl Iterator<Item = u32> {
        (0..32).filter(move |b| self.0 >> b & 1 == 1).map(|b| b + 1)
    }

    /// All coalitions of a k-player game in mask order.
    pub fn all(k: u32) -> impl Iterator<Item = Coalition> {
        (0..1u32 << k).map(Coalition)
    }

    pub fn fits(self, k: u32) -> bool {
        self.0 >> k == 0
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let players: Vec<String> = self.players().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", players.join(","))
    }
}

impl serde::Serialize for Coalition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    /// The [O]-free language L.
    L,
    /// L extended with the outcome modality [O].
    LPlus,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Top,
    Prop(u32),
    Neg(Formula),
    Implies(Formula, Formula),
    Box(Coalition, Formula),
    BoxO(Formula),
}

/// A shared, immutable formula. Cloning is a reference-count bump.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Formula(Arc<Node>);

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Formula {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub fn top() -> Formula {
        Formula(Arc::new(Node::Top))
    }

    /// `0 := ¬1`
    pub fn bottom() -> Formula {
        Formula::top().neg()
    }

    pub fn prop(p: u32) -> Formula {
        Formula(Arc::new(Node::Prop(p)))
    }

    pub fn neg(&self) -> Formula {
        Formula(Arc::new(Node::Neg(self.clone())))
    }

    pub fn implies(&self, other: &Formula) -> Formula {
        Formula(Arc::new(Node::Implies(self.clone(), other.clone())))
    }

    pub fn boxed(&self, c: Coalition) -> Formula {
        Formula(Arc::new(Node::Box(c, self.clone())))
    }

    pub fn box_o(&self) -> Formula {
        Formula(Arc::new(Node::BoxO(self.clone())))
    }

    /// `φ ⊕ ψ := ¬φ → ψ`
    pub fn oplus(&self, other: &Formula) -> Formula {
        self.neg().implies(other)
    }

    /// `φ ⊙ ψ := ¬(φ → ¬ψ)`
    pub fn odot(&self, other: &Formula) -> Formula {
        self.implies(&other.neg()).neg()
    }

    /// `φ ∨ ψ := (φ → ψ) → ψ`, the same as `¬(¬φ ⊕ ψ) ⊕ ψ` once `¬¬` is cancelled.
    pub fn or(&self, other: &Formula) -> Formula {
        self.implies(other).implies(other)
    }

    /// `φ ∧ ψ := ¬(¬φ ∨ ¬ψ)`
    pub fn and(&self, other: &Formula) -> Formula {
        self.neg().or(&other.neg()).neg()
    }

    /// `φ ↔ ψ := (φ → ψ) ⊙ (ψ → φ)`
    pub fn iff(&self, other: &Formula) -> Formula {
        self.implies(other).odot(&other.implies(self))
    }

    /// `m.φ`, the m-fold ⊕ of φ. `0.φ` is the constant 0.
    pub fn times(&self, m: u32) -> Formula {
        if m == 0 {
            return Formula::bottom();
        }
        let negated = self.neg();
        let mut acc = self.clone();
        for _ in 1..m {
            acc = negated.implies(&acc);
        }
        acc
    }

    pub fn tau_op(&self, op: TauOp) -> Formula {
        match op {
            TauOp::TauOplus => self.oplus(self),
            TauOp::TauOdot => self.odot(self),
        }
    }

    /// `τ_{i/n}(φ)` expanded through the synthesized doubling term.
    pub fn tau(&self, chain: Chain, i: u32) -> Option<Formula> {
        let term = synthesize_tau_term(chain, i).ok()?;
        Some(term.ops.iter().fold(self.clone(), |acc, &op| acc.tau_op(op)))
    }

    /// Propositions occurring in the formula.
    pub fn props(&self) -> BTreeSet<u32> {
        let closure = ClosureSet::new(self);
        closure
            .nodes()
            .iter()
            .filter_map(|n| match n {
                ClosureNode::Prop(p) => Some(*p),
                _ => None,
            })
            .collect()
    }

    pub fn mentions_box_o(&self) -> bool {
        ClosureSet::new(self).nodes().iter().any(|n| matches!(n, ClosureNode::BoxO(_)))
    }

    /// Coalitions fit `k` players and [O] only occurs in L⁺.
    pub fn check(&self, k: u32, dialect: Dialect) -> Result<(), SyntaxError> {
        for node in ClosureSet::new(self).nodes() {
            match node {
                ClosureNode::Box(c, _) if !c.fits(k) => {
                    let player = 32 - c.0.leading_zeros();
                    return Err(SyntaxError::UnknownPlayer { player, k });
                }
                ClosureNode::BoxO(_) if dialect == Dialect::L => return Err(SyntaxError::DialectViolation),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn substitute(&self, p: u32, replacement: &Formula) -> Formula {
        fn go(f: &Formula, p: u32, r: &Formula, memo: &mut HashMap<*const Node, Formula>) -> Formula {
            if let Some(done) = memo.get(&f.ptr()) {
                return done.clone();
            }
            let out = match f.node() {
                Node::Top => f.clone(),
                Node::Prop(q) if *q == p => r.clone(),
                Node::Prop(_) => f.clone(),
                Node::Neg(a) => go(a, p, r, memo).neg(),
                Node::Implies(a, b) => {
                    let a = go(a, p, r, memo);
                    a.implies(&go(b, p, r, memo))
                }
                Node::Box(c, a) => go(a, p, r, memo).boxed(*c),
                Node::BoxO(a) => go(a, p, r, memo).box_o(),
            };
            memo.insert(f.ptr(), out.clone());
            out
        }
        go(self, p, replacement, &mut HashMap::new())
    }

    /// Length of the longest root-to-leaf path, counting nodes.
    pub fn depth(&self) -> usize {
        let closure = ClosureSet::new(self);
        let mut depth = vec![0usize; closure.len()];
        for (i, node) in closure.nodes().iter().enumerate() {
            depth[i] = 1 + node.children().iter().map(|&c| depth[c]).max().unwrap_or(0);
        }
        depth[closure.root()]
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Top => write!(f, "1"),
            Node::Prop(p) => write!(f, "p{p}"),
            Node::Neg(a) => write!(f, "~{a}"),
            Node::Implies(a, b) => write!(f, "({a} -> {b})"),
            Node::Box(c, a) => write!(f, "[{c}]{a}"),
            Node::BoxO(a) => write!(f, "[O]{a}"),
        }
    }
}

/// A kernel node whose children are indices into a [`ClosureSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosureNode {
    Top,
    Prop(u32),
    Neg(usize),
    Implies(usize, usize),
    Box(Coalition, usize),
    BoxO(usize),
}

impl ClosureNode {
    pub fn children(&self) -> Vec<usize> {
        match *self {
            ClosureNode::Top | ClosureNode::Prop(_) => vec![],
            ClosureNode::Neg(a) | ClosureNode::Box(_, a) | ClosureNode::BoxO(a) => vec![a],
            ClosureNode::Implies(a, b) => vec![a, b],
        }
    }
}

/// The distinct subformulas of a generator, children before parents.
///
/// Structurally equal subtrees are merged, so `len()` is the number of
/// distinct subformulas. The generator is always the last entry.
#[derive(Debug, Clone)]
pub struct ClosureSet {
    nodes: Vec<ClosureNode>,
    formulas: Vec<Formula>,
}

impl ClosureSet {
    pub fn new(generator: &Formula) -> ClosureSet {
        let mut set = ClosureSet { nodes: Vec::new(), formulas: Vec::new() };
        let mut by_ptr: HashMap<*const Node, usize> = HashMap::new();
        let mut by_node: HashMap<ClosureNode, usize> = HashMap::new();
        set.intern(generator, &mut by_ptr, &mut by_node);
        set
    }

    fn intern(
        &mut self,
        f: &Formula,
        by_ptr: &mut HashMap<*const Node, usize>,
        by_node: &mut HashMap<ClosureNode, usize>,
    ) -> usize {
        if let Some(&i) = by_ptr.get(&f.ptr()) {
            return i;
        }
        let node = match f.node() {
            Node::Top => ClosureNode::Top,
            Node::Prop(p) => ClosureNode::Prop(*p),
            Node::Neg(a) => ClosureNode::Neg(self.intern(a, by_ptr, by_node)),
            Node::Implies(a, b) => {
                let a = self.intern(a, by_ptr, by_node);
                ClosureNode::Implies(a, self.intern(b, by_ptr, by_node))
            }
            Node::Box(c, a) => ClosureNode::Box(*c, self.intern(a, by_ptr, by_node)),
            Node::BoxO(a) => ClosureNode::BoxO(self.intern(a, by_ptr, by_node)),
        };
        let i = *by_node.entry(node).or_insert_with(|| {
            self.nodes.push(node);
            self.formulas.push(f.clone());
            self.nodes.len() - 1
        });
        by_ptr.insert(f.ptr(), i);
        i
    }

    pub fn nodes(&self) -> &[ClosureNode] {
        &self.nodes
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn generator(&self) -> &Formula {
        &self.formulas[self.root()]
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        let other = ClosureSet::new(f);
        let mut map = vec![0usize; other.len()];
        for (j, node) in other.nodes.iter().enumerate() {
            let translated = match *node {
                ClosureNode::Neg(a) => ClosureNode::Neg(map[a]),
                ClosureNode::Implies(a, b) => ClosureNode::Implies(map[a], map[b]),
                ClosureNode::Box(c, a) => ClosureNode::Box(c, map[a]),
                ClosureNode::BoxO(a) => ClosureNode::BoxO(map[a]),
                leaf => leaf,
            };
            map[j] = self.nodes.iter().position(|n| *n == translated)?;
        }
        Some(map[other.root()])
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.index_of(f).is_some()
    }
}

/// `subformulas(φ)`: the finite subformula set of φ.
pub fn subformulas(f: &Formula) -> ClosureSet {
    ClosureSet::new(f)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("player {player} is not among the {k} players")]
    UnknownPlayer { player: u32, k: u32 },
    #[error("the modality [O] is not part of the language L")]
    DialectViolation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(u32),
    Prop(u32),
    Tau,
    Neg,
    Arrow,
    Iff,
    And,
    Or,
    Oplus,
    Odot,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    O,
    N,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let err = |position: usize, message: &str| SyntaxError::Syntax { position, message: message.into() };
    let number = |start: usize| -> Result<(u32, usize), SyntaxError> {
        let end = bytes[start..].iter().position(|b| !b.is_ascii_digit()).map_or(bytes.len(), |d| start + d);
        let value = text[start..end].parse().map_err(|_| err(start, "number out of range"))?;
        Ok((value, end))
    };
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let rest = &text[i..];
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("(+)") {
            (Tok::Oplus, 3)
        } else if rest.starts_with("(.)") {
            (Tok::Odot, 3)
        } else if rest.starts_with("tau") {
            (Tok::Tau, 3)
        } else if c == b'p' {
            if !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                return Err(err(i, "expected digits after 'p'"));
            }
            let (p, end) = number(i + 1)?;
            toks.push((i, Tok::Prop(p)));
            i = end;
            continue;
        } else if c.is_ascii_digit() {
            let (v, end) = number(i)?;
            toks.push((i, Tok::Num(v)));
            i = end;
            continue;
        } else {
            let tok = match c {
                b'~' => Tok::Neg,
                b'&' => Tok::And,
                b'|' => Tok::Or,
                b'.' => Tok::Dot,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBracket,
                b']' => Tok::RBracket,
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b',' => Tok::Comma,
                b'O' => Tok::O,
                b'N' => Tok::N,
                _ => return Err(err(i, &format!("unexpected character {:?}", rest.chars().next().unwrap()))),
            };
            (tok, 1)
        };
        toks.push((i, tok));
        i += len;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    k: u32,
    dialect: Dialect,
    chain: Chain,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::Syntax { position: self.offset(), message: message.into() })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.implication()?;
        while self.eat(&Tok::Iff) {
            acc = acc.iff(&self.implication()?);
        }
        Ok(acc)
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            return Ok(lhs.implies(&self.implication()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.conjunction()?;
        loop {
            if self.eat(&Tok::Or) {
                acc = acc.or(&self.conjunction()?);
            } else if self.eat(&Tok::Oplus) {
                acc = acc.oplus(&self.conjunction()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::And) {
                acc = acc.and(&self.unary()?);
            } else if self.eat(&Tok::Odot) {
                acc = acc.odot(&self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Neg) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                if self.eat(&Tok::O) {
                    if self.dialect == Dialect::L {
                        return Err(SyntaxError::DialectViolation);
                    }
                    self.expect(Tok::RBracket, "']'")?;
                    return Ok(self.unary()?.box_o());
                }
                let c = self.coalition()?;
                self.expect(Tok::RBracket, "']'")?;
                Ok(self.unary()?.boxed(c))
            }
            Some(Tok::Tau) => {
                self.pos += 1;
                self.expect(Tok::LParen, "'(' after tau")?;
                let Some(Tok::Num(i)) = self.peek().cloned() else {
                    return self.fail("expected threshold index");
                };
                if i == 0 || i > self.chain.n() as u32 {
                    return self.fail(format!("threshold index {i} outside 1..={}", self.chain.n()));
                }
                self.pos += 1;
                self.expect(Tok::RParen, "')'")?;
                let arg = self.unary()?;
                Ok(arg.tau(self.chain, i).expect("index checked above"))
            }
            Some(Tok::Num(m)) if self.toks.get(self.pos + 1).map(|(_, t)| t) == Some(&Tok::Dot) => {
                self.pos += 2;
                Ok(self.unary()?.times(m))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Num(1)) => {
                self.pos += 1;
                Ok(Formula::top())
            }
            Some(Tok::Num(0)) => {
                self.pos += 1;
                Ok(Formula::bottom())
            }
            Some(Tok::Prop(p)) => {
                self.pos += 1;
                Ok(Formula::prop(p))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Num(_)) => self.fail("only 0 and 1 are constants; use m.F for multiples"),
            Some(_) => self.fail("expected a formula"),
            None => self.fail("unexpected end of input"),
        }
    }

    fn coalition(&mut self) -> Result<Coalition, SyntaxError> {
        if self.eat(&Tok::N) {
            return Ok(Coalition::grand(self.k));
        }
        self.expect(Tok::LBrace, "a coalition such as {1,2}, {} or N")?;
        let mut players = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                let Some(Tok::Num(p)) = self.peek().cloned() else {
                    return self.fail("expected a player number");
                };
                if p == 0 || p > self.k {
                    return Err(SyntaxError::UnknownPlayer { player: p, k: self.k });
                }
                self.pos += 1;
                players.push(p);
                if self.eat(&Tok::RBrace) {
                    break;
                }
                self.expect(Tok::Comma, "',' or '}'")?;
            }
        }
        Ok(Coalition::from_players(players))
    }
}

/// Parses a formula over `k` players. `chain` fixes the meaning of `tau(i)`.
pub fn parse(text: &str, k: u32, dialect: Dialect, chain: Chain) -> Result<Formula, SyntaxError> {
    if k == 0 || k > MAX_PLAYERS {
        return Err(SyntaxError::Syntax { position: 0, message: format!("player count {k} outside 1..={MAX_PLAYERS}") });
    }
    let mut parser = Parser { toks: lex(text)?, pos: 0, end: text.len(), k, dialect, chain };
    let f = parser.iff()?;
    if parser.pos != parser.toks.len() {
        return parser.fail("trailing input");
    }
    Ok(f)
}

/// Prints the kernel AST in the parser's grammar.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

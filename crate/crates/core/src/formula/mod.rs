//! Formula syntax for world formulas and propositional agent formulas.
//!
//! Only the core constructors are stored. Derived connectives (`true`, `|`,
//! `->`, `<->`, and the dual `P[psi]`) are expanded by the smart constructors
//! in [`Boolean`] and by the parser, so every algorithm downstream deals with
//! falsum, atoms, negation, conjunction and the indexed common-knowledge
//! operator only.

mod closure;
pub(crate) mod parse;
pub(crate) mod print;

use std::collections::BTreeSet;
use std::fmt;

pub use closure::{closure, ClosureError, ClosureSet, DEFAULT_CLOSURE_CAP};
pub use parse::{ParseError, ParseErrorKind};

/// Boolean smart constructors shared by every formula language in the crate.
pub trait Boolean: Sized + Clone {
    fn falsum() -> Self;
    fn neg(self) -> Self;
    fn and(self, other: Self) -> Self;

    fn verum() -> Self {
        Self::falsum().neg()
    }

    /// `a | b`, stored as `~(~a & ~b)`.
    fn or(self, other: Self) -> Self {
        self.neg().and(other.neg()).neg()
    }

    /// `a -> b`, stored as `~(a & ~b)`.
    fn implies(self, other: Self) -> Self {
        self.and(other.neg()).neg()
    }

    fn iff(self, other: Self) -> Self {
        self.clone()
            .implies(other.clone())
            .and(other.implies(self))
    }

    /// Left-folded conjunction; the empty conjunction is `true`.
    fn conjunction<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(|acc, f| acc.and(f))
            .unwrap_or_else(Self::verum)
    }

    /// Left-folded disjunction; the empty disjunction is `false`.
    fn disjunction<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(|acc, f| acc.or(f))
            .unwrap_or_else(Self::falsum)
    }
}

/// Propositional formula describing a set of agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentFormula {
    Falsum,
    Atom(String),
    Not(Box<AgentFormula>),
    And(Box<AgentFormula>, Box<AgentFormula>),
}

/// Formula evaluated at worlds; `C(psi, phi)` says that `phi` is common
/// knowledge among the agents satisfying `psi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WorldFormula {
    Falsum,
    Atom(String),
    Not(Box<WorldFormula>),
    And(Box<WorldFormula>, Box<WorldFormula>),
    C(AgentFormula, Box<WorldFormula>),
}

impl Boolean for AgentFormula {
    fn falsum() -> Self {
        AgentFormula::Falsum
    }
    fn neg(self) -> Self {
        AgentFormula::Not(Box::new(self))
    }
    fn and(self, other: Self) -> Self {
        AgentFormula::And(Box::new(self), Box::new(other))
    }
}

impl Boolean for WorldFormula {
    fn falsum() -> Self {
        WorldFormula::Falsum
    }
    fn neg(self) -> Self {
        WorldFormula::Not(Box::new(self))
    }
    fn and(self, other: Self) -> Self {
        WorldFormula::And(Box::new(self), Box::new(other))
    }
}

impl AgentFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        AgentFormula::Atom(name.into())
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse_agent(text)
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            AgentFormula::Falsum | AgentFormula::Atom(_) => 1,
            AgentFormula::Not(f) => 1 + f.size(),
            AgentFormula::And(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            AgentFormula::Falsum => {}
            AgentFormula::Atom(a) => {
                out.insert(a.clone());
            }
            AgentFormula::Not(f) => f.collect_atoms(out),
            AgentFormula::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// All subformulas, including the formula itself.
    pub fn subformulae(&self) -> BTreeSet<AgentFormula> {
        let mut out = BTreeSet::new();
        self.collect_subformulae(&mut out);
        out
    }

    pub(crate) fn collect_subformulae(&self, out: &mut BTreeSet<AgentFormula>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            AgentFormula::Falsum | AgentFormula::Atom(_) => {}
            AgentFormula::Not(f) => f.collect_subformulae(out),
            AgentFormula::And(a, b) => {
                a.collect_subformulae(out);
                b.collect_subformulae(out);
            }
        }
    }

    /// Evaluate under a valuation; atoms the valuation does not know are false.
    pub fn eval(&self, valuation: &dyn Fn(&str) -> bool) -> bool {
        match self {
            AgentFormula::Falsum => false,
            AgentFormula::Atom(a) => valuation(a),
            AgentFormula::Not(f) => !f.eval(valuation),
            AgentFormula::And(a, b) => a.eval(valuation) && b.eval(valuation),
        }
    }
}

impl WorldFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        WorldFormula::Atom(name.into())
    }

    /// `C[index] body`.
    pub fn common(index: AgentFormula, body: WorldFormula) -> Self {
        WorldFormula::C(index, Box::new(body))
    }

    /// The dual `P[index] body`, stored as `~C[index] ~body`.
    pub fn possible(index: AgentFormula, body: WorldFormula) -> Self {
        WorldFormula::common(index, body.neg()).neg()
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse_world(text)
    }

    /// Number of syntax-tree nodes, counting the nodes of agent indices.
    pub fn size(&self) -> usize {
        match self {
            WorldFormula::Falsum | WorldFormula::Atom(_) => 1,
            WorldFormula::Not(f) => 1 + f.size(),
            WorldFormula::And(a, b) => 1 + a.size() + b.size(),
            WorldFormula::C(psi, f) => 1 + psi.size() + f.size(),
        }
    }

    /// Nesting depth of common-knowledge operators.
    pub fn modal_depth(&self) -> usize {
        match self {
            WorldFormula::Falsum | WorldFormula::Atom(_) => 0,
            WorldFormula::Not(f) => f.modal_depth(),
            WorldFormula::And(a, b) => a.modal_depth().max(b.modal_depth()),
            WorldFormula::C(_, f) => 1 + f.modal_depth(),
        }
    }

    pub fn world_atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let WorldFormula::Atom(a) = f {
                out.insert(a.clone());
            }
        });
        out
    }

    pub fn agent_atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let WorldFormula::C(psi, _) = f {
                psi.collect_atoms(&mut out);
            }
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&WorldFormula)) {
        f(self);
        match self {
            WorldFormula::Falsum | WorldFormula::Atom(_) => {}
            WorldFormula::Not(g) | WorldFormula::C(_, g) => g.visit(f),
            WorldFormula::And(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// World subformulas, including the formula itself.
    pub fn subformulae(&self) -> BTreeSet<WorldFormula> {
        let mut out = BTreeSet::new();
        self.collect_subformulae(&mut out);
        out
    }

    pub(crate) fn collect_subformulae(&self, out: &mut BTreeSet<WorldFormula>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            WorldFormula::Falsum | WorldFormula::Atom(_) => {}
            WorldFormula::Not(f) | WorldFormula::C(_, f) => f.collect_subformulae(out),
            WorldFormula::And(a, b) => {
                a.collect_subformulae(out);
                b.collect_subformulae(out);
            }
        }
    }

    /// Every agent formula occurring as a C-index, closed under subformulas.
    pub fn agent_subformulae(&self) -> BTreeSet<AgentFormula> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let WorldFormula::C(psi, _) = f {
                psi.collect_subformulae(&mut out);
            }
        });
        out
    }

    /// Normalized negation: strips one outer negation if present, else adds one.
    pub fn nneg(&self) -> WorldFormula {
        match self {
            WorldFormula::Not(inner) => (**inner).clone(),
            other => other.clone().neg(),
        }
    }
}

impl fmt::Display for AgentFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(self))
    }
}

impl fmt::Display for WorldFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(self))
    }
}

impl std::str::FromStr for WorldFormula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WorldFormula::parse(s)
    }
}

impl std::str::FromStr for AgentFormula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentFormula::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> WorldFormula {
        WorldFormula::parse(s).unwrap()
    }

    #[test]
    fn nneg_strips_or_adds() {
        assert_eq!(w("~p").nneg(), w("p"));
        assert_eq!(w("p").nneg(), w("~p"));
        assert_eq!(w("C[q] q").nneg(), w("~C[q] q"));
        assert_eq!(w("false").nneg(), WorldFormula::Falsum.neg());
        let f = w("p & C[a] r");
        assert_eq!(f.nneg().nneg(), f);
    }

    #[test]
    fn subformulae_examples() {
        let f = w("C[a & b] p");
        let subs = f.subformulae();
        assert_eq!(subs, [f.clone(), w("p")].into_iter().collect());
        let agents = f.agent_subformulae();
        let psi = AgentFormula::parse("a & b").unwrap();
        assert_eq!(
            agents,
            [psi, AgentFormula::atom("a"), AgentFormula::atom("b")]
                .into_iter()
                .collect()
        );

        let g = w("p & ~p");
        assert_eq!(g.subformulae().len(), 3);
        assert_eq!(w("false").subformulae().len(), 1);
    }

    #[test]
    fn empty_folds() {
        assert_eq!(WorldFormula::conjunction(vec![]), WorldFormula::verum());
        assert_eq!(WorldFormula::disjunction(vec![]), WorldFormula::Falsum);
        assert_eq!(
            WorldFormula::conjunction(vec![w("p")]),
            w("p"),
            "single conjunct is not wrapped"
        );
    }

    #[test]
    fn sizes_and_depth() {
        let f = w("C[q] C[r] p");
        assert_eq!(f.size(), 5);
        assert_eq!(f.modal_depth(), 2);
        assert_eq!(f.agent_atoms().len(), 2);
        assert_eq!(f.world_atoms().len(), 1);
    }
}

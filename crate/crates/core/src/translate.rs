//! Group epistemic logic (common knowledge over explicit, named groups) and
//! the satisfiability-preserving encodings between it and CIEL.
//!
//! `q` replaces each group `{a, b}` by the agent formula `p_a | p_b` over
//! fresh agent atoms. `s` goes the other way for a concrete agent model,
//! replacing each index by the names of the agents it denotes.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::agentlogic::{Agent, AgentModel, AgentTheory};
use crate::formula::parse::{self, Grammar, Parser, Tok};
use crate::formula::print::{self, Printable, View};
use crate::formula::{AgentFormula, Boolean, ParseError, ParseErrorKind, WorldFormula};
use crate::partition::Partition;
use crate::semantics::{CielModel, Frame, GelModel, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GelFormula {
    Falsum,
    Atom(String),
    Not(Box<GelFormula>),
    And(Box<GelFormula>, Box<GelFormula>),
    /// Common knowledge among a nonempty group of named agents.
    C(BTreeSet<String>, Box<GelFormula>),
}

impl Boolean for GelFormula {
    fn falsum() -> Self {
        GelFormula::Falsum
    }
    fn neg(self) -> Self {
        GelFormula::Not(Box::new(self))
    }
    fn and(self, other: Self) -> Self {
        GelFormula::And(Box::new(self), Box::new(other))
    }
}

impl GelFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        GelFormula::Atom(name.into())
    }

    /// Panics on an empty group.
    pub fn common<I, S>(group: I, body: GelFormula) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let group: BTreeSet<String> = group.into_iter().map(Into::into).collect();
        assert!(!group.is_empty(), "groups are nonempty");
        GelFormula::C(group, Box::new(body))
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse_all(text)
    }

    /// Node count, each group counted as one node per member.
    pub fn size(&self) -> usize {
        match self {
            GelFormula::Falsum | GelFormula::Atom(_) => 1,
            GelFormula::Not(f) => 1 + f.size(),
            GelFormula::And(a, b) => 1 + a.size() + b.size(),
            GelFormula::C(g, f) => g.len() + f.size(),
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            GelFormula::Falsum | GelFormula::Atom(_) => 0,
            GelFormula::Not(f) => f.modal_depth(),
            GelFormula::And(a, b) => a.modal_depth().max(b.modal_depth()),
            GelFormula::C(_, f) => 1 + f.modal_depth(),
        }
    }

    /// Agent names mentioned in groups.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let GelFormula::C(g, _) = f {
                out.extend(g.iter().cloned());
            }
        });
        out
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let GelFormula::Atom(a) = f {
                out.insert(a.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&GelFormula)) {
        f(self);
        match self {
            GelFormula::Falsum | GelFormula::Atom(_) => {}
            GelFormula::Not(g) | GelFormula::C(_, g) => g.visit(f),
            GelFormula::And(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Normalized negation: strips one outer negation, otherwise adds one.
    pub fn nneg(&self) -> GelFormula {
        match self {
            GelFormula::Not(f) => (**f).clone(),
            f => f.clone().neg(),
        }
    }

    /// Subformulas including `self`.
    pub fn subformulae(&self) -> BTreeSet<GelFormula> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            out.insert(f.clone());
        });
        out
    }
}

impl Printable for GelFormula {
    fn view(&self) -> View<'_, Self> {
        match self {
            GelFormula::Falsum => View::Falsum,
            GelFormula::Atom(a) => View::Leaf(Cow::Borrowed(a)),
            GelFormula::Not(f) => View::Not(f),
            GelFormula::And(a, b) => View::And(a, b),
            GelFormula::C(g, body) => {
                let names = g.iter().map(String::as_str).collect::<Vec<_>>().join(", ");
                View::Prefix {
                    text: format!("C{{{names}}} "),
                    dual: Some(format!("P{{{names}}} ")),
                    loose: false,
                    body,
                }
            }
        }
    }
}

impl Grammar for GelFormula {
    fn unary(p: &mut Parser) -> Result<Self, ParseError> {
        if let Some(f) = p.common_unary::<Self>()? {
            return Ok(f);
        }
        match p.peek().clone() {
            Tok::Ident(name) => {
                let is_modal = (name == "C" || name == "P") && *p.peek_at(1) == Tok::LBrace;
                p.bump();
                if !is_modal {
                    return Ok(GelFormula::Atom(name));
                }
                p.bump();
                if *p.peek() == Tok::RBrace {
                    return Err(p.error(ParseErrorKind::Syntax, "groups must be nonempty"));
                }
                let mut group = BTreeSet::new();
                group.insert(p.ident()?);
                while *p.peek() == Tok::Comma {
                    p.bump();
                    group.insert(p.ident()?);
                }
                p.expect(Tok::RBrace)?;
                let body = GelFormula::unary(p)?;
                Ok(if name == "C" {
                    GelFormula::C(group, Box::new(body))
                } else {
                    GelFormula::C(group, Box::new(body.neg())).neg()
                })
            }
            _ => Err(p.unexpected("formula")),
        }
    }
}

impl fmt::Display for GelFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(self))
    }
}

impl std::str::FromStr for GelFormula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("index `{0}` denotes no agent; groups must be nonempty")]
    EmptyGroup(AgentFormula),
    #[error("agent atom `{0}` is not interpreted by the agent model")]
    MissingAgentAtom(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Fresh agent atom standing for the agent named `name`.
pub fn agent_atom(name: &str) -> String {
    format!("p_{name}")
}

/// The encoding `q`: groups become disjunctions of fresh agent atoms.
pub fn gel_to_ciel(phi: &GelFormula) -> WorldFormula {
    match phi {
        GelFormula::Falsum => WorldFormula::Falsum,
        GelFormula::Atom(a) => WorldFormula::Atom(a.clone()),
        GelFormula::Not(f) => gel_to_ciel(f).neg(),
        GelFormula::And(a, b) => gel_to_ciel(a).and(gel_to_ciel(b)),
        GelFormula::C(g, body) => {
            let index = AgentFormula::disjunction(g.iter().map(|a| AgentFormula::atom(agent_atom(a))));
            WorldFormula::common(index, gel_to_ciel(body))
        }
    }
}

/// One CIEL agent per name, the agent named `a` satisfying exactly `p_a`.
pub fn gel_model_to_ciel(m: &GelModel) -> CielModel {
    let agents = m
        .names()
        .iter()
        .map(|a| Agent {
            name: a.clone(),
            valuation: m
                .names()
                .iter()
                .map(|b| (agent_atom(b), a == b))
                .collect(),
        })
        .collect();
    CielModel::new(m.frame().clone(), AgentModel::new(agents, AgentTheory::empty()))
        .expect("distinct names give distinct agents")
}

/// The relation of the agent named `a` is the group relation of the agents
/// satisfying `p_a`.
pub fn ciel_model_to_gel(m: &CielModel, names: &[String]) -> Result<GelModel, TranslateError> {
    let agents = m.agent_model();
    let mut indist = Vec::with_capacity(names.len());
    for a in names {
        let atom = agent_atom(a);
        if !agents.agents().iter().any(|k| k.valuation.contains_key(&atom)) {
            return Err(TranslateError::MissingAgentAtom(atom));
        }
        let group = agents.denote(&AgentFormula::atom(atom));
        indist.push(m.frame().group_partition(&group));
    }
    let frame = Frame::new(m.worlds().to_vec(), m.frame().valuation().clone(), indist)?;
    Ok(GelModel::new(frame, names.to_vec())?)
}

/// The encoding `s` for a fixed agent model: each index becomes the group of
/// names of the agents it denotes.
pub fn ciel_to_gel(phi: &WorldFormula, agents: &AgentModel) -> Result<GelFormula, TranslateError> {
    Ok(match phi {
        WorldFormula::Falsum => GelFormula::Falsum,
        WorldFormula::Atom(a) => GelFormula::Atom(a.clone()),
        WorldFormula::Not(f) => ciel_to_gel(f, agents)?.neg(),
        WorldFormula::And(a, b) => ciel_to_gel(a, agents)?.and(ciel_to_gel(b, agents)?),
        WorldFormula::C(psi, body) => {
            let group: BTreeSet<String> = agents
                .denote(psi)
                .ones()
                .map(|i| agents.agents()[i].name.clone())
                .collect();
            if group.is_empty() {
                return Err(TranslateError::EmptyGroup(psi.clone()));
            }
            GelFormula::C(group, Box::new(ciel_to_gel(body, agents)?))
        }
    })
}

/// The GEL model on which `s`-translations are evaluated: the same frame,
/// with agents addressed by name.
pub fn ciel_agents_as_gel(m: &CielModel) -> GelModel {
    let names = m.agent_model().agents().iter().map(|a| a.name.clone()).collect();
    GelModel::new(m.frame().clone(), names).expect("agent names are distinct")
}

/// Build a GEL model from named relations given as pair lists (closed to
/// equivalences) and a valuation over world indices.
pub fn gel_model_from_pairs(
    worlds: usize,
    valuation: BTreeMap<String, Vec<usize>>,
    relations: BTreeMap<String, Vec<(usize, usize)>>,
) -> Result<GelModel, ModelError> {
    let names: Vec<String> = relations.keys().cloned().collect();
    let indist = relations
        .into_values()
        .map(|r| Partition::closure_of(worlds, r))
        .collect();
    let valuation = valuation
        .into_iter()
        .map(|(a, xs)| {
            let mut s = fixedbitset::FixedBitSet::with_capacity(worlds);
            s.extend(xs);
            (a, s)
        })
        .collect();
    let frame = Frame::new((0..worlds).map(|i| format!("w{i}")).collect(), valuation, indist)?;
    GelModel::new(frame, names)
}

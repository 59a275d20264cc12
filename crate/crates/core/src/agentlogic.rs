//! Classical propositional agent logic with a background theory.
//!
//! This module is the seam any richer agent logic has to fill: a filtered
//! agent model for a subformula-closed set, denotations, characteristic
//! formulas, the agent closure, and satisfiability/entailment oracles.
//!
//! Global conditions of a scenario that are not per-agent constraints (for
//! example "every bit is seen by somebody") need no encoding here: the
//! filtered model realizes every satisfiable type, so such conditions hold
//! automatically.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{AgentFormula, Boolean, ParseError};

/// Largest number of agent atoms enumerated when building a filtered model.
pub const MAX_FILTER_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("agent theory is unsatisfiable")]
    UnsatisfiableTheory,
    #[error("filtered model over {count} agent atoms exceeds the limit of {cap}")]
    TooManyAtoms { count: usize, cap: usize },
    #[error("theory line {line}: {source}")]
    Parse { line: usize, source: ParseError },
}

/// Constraints every agent has to satisfy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentTheory {
    constraints: Vec<AgentFormula>,
}

impl AgentTheory {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(constraints: Vec<AgentFormula>) -> Result<Self, AgentError> {
        if !sat_agent(&constraints, &AgentTheory::empty()) {
            return Err(AgentError::UnsatisfiableTheory);
        }
        Ok(AgentTheory { constraints })
    }

    /// One agent formula per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, AgentError> {
        let mut constraints = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f = AgentFormula::parse(line).map_err(|mut source| {
                source.line = n + 1;
                AgentError::Parse { line: n + 1, source }
            })?;
            constraints.push(f);
        }
        Self::new(constraints)
    }

    pub fn constraints(&self) -> &[AgentFormula] {
        &self.constraints
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for c in &self.constraints {
            c.collect_atoms(&mut out);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn holds(&self, valuation: &dyn Fn(&str) -> bool) -> bool {
        self.constraints.iter().all(|c| c.eval(valuation))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub name: String,
    pub valuation: BTreeMap<String, bool>,
}

impl Agent {
    /// Atoms missing from the valuation are false.
    pub fn satisfies(&self, psi: &AgentFormula) -> bool {
        psi.eval(&|a| self.valuation.get(a).copied().unwrap_or(false))
    }
}

/// Set of agents, by index into an [`AgentModel`].
pub type AgentSet = FixedBitSet;

/// A finite agent model: named agents with propositional valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentModel {
    agents: Vec<Agent>,
    theory: AgentTheory,
}

impl AgentModel {
    pub fn new(agents: Vec<Agent>, theory: AgentTheory) -> Self {
        AgentModel { agents, theory }
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn theory(&self) -> &AgentTheory {
        &self.theory
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }

    /// Agents violating some theory constraint.
    pub fn theory_violations(&self) -> Vec<&str> {
        self.agents
            .iter()
            .filter(|a| {
                !self
                    .theory
                    .constraints()
                    .iter()
                    .all(|c| a.satisfies(c))
            })
            .map(|a| a.name.as_str())
            .collect()
    }

    pub fn denote(&self, psi: &AgentFormula) -> AgentSet {
        let mut out = FixedBitSet::with_capacity(self.agents.len());
        for (i, a) in self.agents.iter().enumerate() {
            if a.satisfies(psi) {
                out.insert(i);
            }
        }
        out
    }

    pub fn all(&self) -> AgentSet {
        let mut s = FixedBitSet::with_capacity(self.agents.len());
        s.insert_range(..);
        s
    }
}

/// Finite quotient agent model for a subformula-closed set of agent formulas.
///
/// Agents are the theory-satisfying valuations of the relevant atoms, one
/// representative (the lexicographically least valuation) per class of
/// valuations that satisfy the same members of `sigma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredAgentModel {
    model: AgentModel,
    sigma: Vec<AgentFormula>,
    characteristic: Vec<AgentFormula>,
}

impl FilteredAgentModel {
    pub fn model(&self) -> &AgentModel {
        &self.model
    }

    pub fn agents(&self) -> &[Agent] {
        self.model.agents()
    }

    pub fn sigma(&self) -> &[AgentFormula] {
        &self.sigma
    }

    pub fn theory(&self) -> &AgentTheory {
        self.model.theory()
    }

    pub fn denote(&self, psi: &AgentFormula) -> AgentSet {
        self.model.denote(psi)
    }

    /// Characteristic formula of the agent at `index`: it denotes exactly
    /// that agent.
    pub fn characteristic(&self, index: usize) -> &AgentFormula {
        &self.characteristic[index]
    }

    /// `sigma` together with every characteristic formula, without
    /// duplicates, in a deterministic order.
    pub fn clo_ag(&self) -> Vec<AgentFormula> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in self.sigma.iter().chain(self.characteristic.iter()) {
            if seen.insert(f.clone()) {
                out.push(f.clone());
            }
        }
        out
    }

    pub fn into_model(self) -> AgentModel {
        self.model
    }
}

/// Build the filtered agent model of `sigma` under `theory`.
///
/// `sigma` is expected to be closed under subformulas; the characteristic
/// formula of an agent is the conjunction of literals over the atoms of
/// `sigma`, which are themselves members of `sigma`.
pub fn filtered_model(
    sigma: &BTreeSet<AgentFormula>,
    theory: &AgentTheory,
) -> Result<FilteredAgentModel, AgentError> {
    let mut sigma_atoms = BTreeSet::new();
    for f in sigma {
        f.collect_atoms(&mut sigma_atoms);
    }
    let mut all_atoms = sigma_atoms.clone();
    all_atoms.extend(theory.atoms());
    let atoms: Vec<String> = all_atoms.into_iter().collect();
    if atoms.len() > MAX_FILTER_ATOMS {
        return Err(AgentError::TooManyAtoms {
            count: atoms.len(),
            cap: MAX_FILTER_ATOMS,
        });
    }
    let sigma_list: Vec<AgentFormula> = sigma.iter().cloned().collect();
    let key_atoms: Vec<String> = sigma_atoms.into_iter().collect();

    let n = atoms.len();
    let mut classes: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut agents = Vec::new();
    let mut characteristic = Vec::new();
    // Counting upward with the first atom as the most significant bit visits
    // valuations in lexicographic order (false < true).
    for mask in 0u64..(1u64 << n) {
        let bits: Vec<bool> = (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect();
        let lookup = |a: &str| atoms.iter().position(|b| b == a).is_some_and(|i| bits[i]);
        if !theory.holds(&lookup) {
            continue;
        }
        let key: Vec<bool> = sigma_list.iter().map(|f| f.eval(&lookup)).collect();
        if classes.contains_key(&key) {
            continue;
        }
        classes.insert(key, agents.len());
        let valuation: BTreeMap<String, bool> =
            atoms.iter().cloned().zip(bits.iter().copied()).collect();
        let name = format!(
            "k_{}",
            bits.iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect::<String>()
        );
        let literals = key_atoms.iter().map(|a| {
            let atom = AgentFormula::Atom(a.clone());
            if valuation[a] {
                atom
            } else {
                atom.neg()
            }
        });
        characteristic.push(AgentFormula::conjunction(literals));
        agents.push(Agent { name, valuation });
    }
    if agents.is_empty() {
        return Err(AgentError::UnsatisfiableTheory);
    }
    Ok(FilteredAgentModel {
        model: AgentModel::new(agents, theory.clone()),
        sigma: sigma_list,
        characteristic,
    })
}

/// Is `gamma -> psi` true for every theory-satisfying valuation?
pub fn entails(gamma: &AgentFormula, psi: &AgentFormula, theory: &AgentTheory) -> bool {
    !sat_agent(&[gamma.clone(), psi.clone().neg()], theory)
}

/// Is the conjunction of `formulas` satisfiable together with `theory`?
pub fn sat_agent(formulas: &[AgentFormula], theory: &AgentTheory) -> bool {
    let mut all: Vec<&AgentFormula> = formulas.iter().collect();
    all.extend(theory.constraints());
    let mut atoms = BTreeSet::new();
    for f in &all {
        f.collect_atoms(&mut atoms);
    }
    let atoms: Vec<String> = atoms.into_iter().collect();
    let mut assignment: HashMap<&str, bool> = HashMap::new();
    search(&all, &atoms, 0, &mut assignment)
}

// Backtracking over atoms with three-valued evaluation for early cut-off.
fn search<'a>(
    formulas: &[&AgentFormula],
    atoms: &'a [String],
    next: usize,
    assignment: &mut HashMap<&'a str, bool>,
) -> bool {
    let mut undecided = false;
    for f in formulas {
        match partial_eval(f, assignment) {
            Some(false) => return false,
            None => undecided = true,
            Some(true) => {}
        }
    }
    if !undecided {
        return true;
    }
    let Some(atom) = atoms.get(next) else {
        return false;
    };
    for value in [false, true] {
        assignment.insert(atom.as_str(), value);
        if search(formulas, atoms, next + 1, assignment) {
            assignment.remove(atom.as_str());
            return true;
        }
    }
    assignment.remove(atom.as_str());
    false
}

fn partial_eval(f: &AgentFormula, assignment: &HashMap<&str, bool>) -> Option<bool> {
    match f {
        AgentFormula::Falsum => Some(false),
        AgentFormula::Atom(a) => assignment.get(a.as_str()).copied(),
        AgentFormula::Not(g) => partial_eval(g, assignment).map(|b| !b),
        AgentFormula::And(a, b) => match (partial_eval(a, assignment), partial_eval(b, assignment)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
    }
}

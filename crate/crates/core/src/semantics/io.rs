//! JSON model files, validation and DOT export.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::{CielModel, Frame, ModelError};
use crate::agentlogic::{Agent, AgentModel, AgentTheory};
use crate::formula::AgentFormula;
use crate::partition::Partition;

pub type AgentEntry = Agent;

/// On-disk form of a CIEL model. Relations are arbitrary lists of world
/// pairs until validated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub worlds: Vec<String>,
    pub agents: Vec<AgentEntry>,
    #[serde(default)]
    pub theory: Vec<String>,
    #[serde(default)]
    pub world_valuation: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub indist: BTreeMap<String, Vec<(String, String)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// Every relation must already be an equivalence relation.
    Strict,
    /// Relations are replaced by their reflexive-symmetric-transitive closure.
    Normalize,
}

/// How relations are written back to a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStyle {
    /// Every ordered pair, reflexive ones included; passes strict validation.
    Full,
    /// One pair per non-first class member; needs normalization.
    Spanning,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }
}

/// Turn a model file into a model, checking or closing its relations.
pub fn validate(file: &ModelFile, mode: ValidationMode) -> Result<CielModel, ModelError> {
    let n = file.worlds.len();
    let mut world_ix: HashMap<&str, usize> = HashMap::new();
    for (i, w) in file.worlds.iter().enumerate() {
        if world_ix.insert(w, i).is_some() {
            return Err(ModelError::DuplicateWorld(w.clone()));
        }
    }
    let lookup = |w: &str| {
        world_ix
            .get(w)
            .copied()
            .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))
    };

    let constraints = file
        .theory
        .iter()
        .map(|t| {
            AgentFormula::parse(t).map_err(|source| ModelError::Formula {
                text: t.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let theory = if constraints.is_empty() {
        AgentTheory::empty()
    } else {
        AgentTheory::new(constraints)?
    };

    let mut valuation = BTreeMap::new();
    for (atom, ws) in &file.world_valuation {
        let mut s = FixedBitSet::with_capacity(n);
        for w in ws {
            s.insert(lookup(w)?);
        }
        valuation.insert(atom.clone(), s);
    }

    for name in file.indist.keys() {
        if !file.agents.iter().any(|a| &a.name == name) {
            return Err(ModelError::UnknownAgent(name.clone()));
        }
    }
    let mut indist = Vec::with_capacity(file.agents.len());
    for agent in &file.agents {
        let raw = file.indist.get(&agent.name).map(Vec::as_slice).unwrap_or(&[]);
        let pairs = raw
            .iter()
            .map(|(x, y)| Ok((lookup(x)?, lookup(y)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        let closed = Partition::closure_of(n, pairs.iter().copied());
        if mode == ValidationMode::Strict {
            strict_check(&agent.name, &file.worlds, &pairs, &closed)?;
        }
        indist.push(closed);
    }

    let frame = Frame::new(file.worlds.clone(), valuation, indist)?;
    CielModel::new(frame, AgentModel::new(file.agents.clone(), theory))
}

fn strict_check(
    agent: &str,
    worlds: &[String],
    pairs: &[(usize, usize)],
    closed: &Partition,
) -> Result<(), ModelError> {
    let have: HashSet<(usize, usize)> = pairs.iter().copied().collect();
    let report = |property, x: usize, y: usize| ModelError::NotEquivalence {
        agent: agent.to_string(),
        property,
        x: worlds[x].clone(),
        y: worlds[y].clone(),
    };
    if let Some(x) = (0..worlds.len()).find(|&x| !have.contains(&(x, x))) {
        return Err(report("reflexive", x, x));
    }
    if let Some(&(x, y)) = pairs.iter().find(|&&(x, y)| !have.contains(&(y, x))) {
        return Err(report("symmetric", y, x));
    }
    if let Some((x, y)) = closed.pairs().find(|p| !have.contains(p)) {
        return Err(report("transitive", x, y));
    }
    Ok(())
}

impl CielModel {
    pub fn to_file(&self, style: PairStyle) -> ModelFile {
        let worlds = self.worlds().to_vec();
        let name = |x: usize| worlds[x].clone();
        let world_valuation = self
            .frame()
            .valuation()
            .iter()
            .map(|(a, s)| (a.clone(), s.ones().map(name).collect()))
            .collect();
        let indist = self
            .agent_model()
            .agents()
            .iter()
            .zip(self.frame().indist())
            .map(|(a, p)| {
                let pairs: Vec<_> = match style {
                    PairStyle::Full => p.pairs().collect(),
                    PairStyle::Spanning => p.spanning_pairs().collect(),
                };
                let pairs = pairs.into_iter().map(|(x, y)| (name(x), name(y))).collect();
                (a.name.clone(), pairs)
            })
            .collect();
        ModelFile {
            worlds: worlds.clone(),
            agents: self.agent_model().agents().to_vec(),
            theory: self
                .agent_model()
                .theory()
                .constraints()
                .iter()
                .map(ToString::to_string)
                .collect(),
            world_valuation,
            indist,
        }
    }

    /// Graphviz rendering: one node per world labelled with its true atoms,
    /// one undirected edge per agent between consecutive class members.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph model {\n");
        for (x, w) in self.worlds().iter().enumerate() {
            let atoms = self.frame().true_atoms(x).join(",");
            let _ = writeln!(out, "  w{x} [label=\"{w}\\n{atoms}\"];");
        }
        for (a, p) in self.agent_model().agents().iter().zip(self.frame().indist()) {
            for block in p.blocks() {
                for pair in block.windows(2) {
                    let _ = writeln!(out, "  w{} -- w{} [label=\"{}\"];", pair[0], pair[1], a.name);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

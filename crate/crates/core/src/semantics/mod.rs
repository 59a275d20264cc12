//! Explicit finite models and model checking.
//!
//! Indistinguishability relations are stored as partitions. A group relation
//! is the reflexive-transitive closure of the union of its members'
//! relations; on equivalence relations it is again an equivalence relation,
//! so a group's classes are the connected components of the union.

mod gel;
mod io;
mod pseudo;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::agentlogic::{AgentError, AgentModel, AgentSet};
use crate::formula::{ParseError, WorldFormula};
use crate::partition::{Partition, UnionFind};

pub use gel::GelModel;
pub use io::{validate, AgentEntry, ModelFile, PairStyle, ValidationMode};
pub use pseudo::PseudoModel;

/// Set of worlds, by index.
pub type WorldSet = FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("duplicate agent `{0}`")]
    DuplicateAgent(String),
    #[error("relation of agent `{agent}` is not {property}: missing pair ({x}, {y})")]
    NotEquivalence {
        agent: String,
        property: &'static str,
        x: String,
        y: String,
    },
    #[error("agent `{0}` violates the agent theory")]
    TheoryViolation(String),
    #[error(transparent)]
    Theory(#[from] AgentError),
    #[error("formula `{text}`: {source}")]
    Formula { text: String, source: ParseError },
    #[error("malformed model: {0}")]
    Malformed(String),
}

/// Worlds, world valuation and one partition per agent index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    worlds: Vec<String>,
    valuation: BTreeMap<String, WorldSet>,
    indist: Vec<Partition>,
}

impl Frame {
    pub fn new(
        worlds: Vec<String>,
        valuation: BTreeMap<String, WorldSet>,
        indist: Vec<Partition>,
    ) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for w in &worlds {
            if !seen.insert(w) {
                return Err(ModelError::DuplicateWorld(w.clone()));
            }
        }
        let n = worlds.len();
        if indist.iter().any(|p| p.len() != n) {
            return Err(ModelError::Malformed("relation size differs from world count".into()));
        }
        let valuation = valuation
            .into_iter()
            .map(|(a, mut s)| {
                if s.len() > n && s.ones().any(|x| x >= n) {
                    return Err(ModelError::Malformed(format!("atom `{a}` holds outside the worlds")));
                }
                s.grow(n);
                Ok((a, s))
            })
            .collect::<Result<_, _>>()?;
        Ok(Frame { worlds, valuation, indist })
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn valuation(&self) -> &BTreeMap<String, WorldSet> {
        &self.valuation
    }

    pub fn indist(&self) -> &[Partition] {
        &self.indist
    }

    /// Worlds where `atom` holds; absent atoms hold nowhere.
    pub fn atom_extension(&self, atom: &str) -> WorldSet {
        self.valuation
            .get(atom)
            .cloned()
            .unwrap_or_else(|| FixedBitSet::with_capacity(self.len()))
    }

    pub fn true_atoms(&self, x: usize) -> Vec<&str> {
        self.valuation
            .iter()
            .filter(|(_, s)| s.contains(x))
            .map(|(a, _)| a.as_str())
            .collect()
    }

    pub fn empty_set(&self) -> WorldSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> WorldSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    fn check_world(&self, x: usize) -> Result<(), ModelError> {
        if x < self.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownWorld(format!("#{x}")))
        }
    }

    /// Class of `x` under the group relation of `group`, by breadth-first
    /// search over the union of the members' relations.
    pub fn group_reach(&self, group: &AgentSet, x: usize) -> Result<WorldSet, ModelError> {
        self.check_world(x)?;
        let mut seen = self.empty_set();
        let mut done_blocks: HashSet<(usize, usize)> = HashSet::new();
        let mut queue = VecDeque::from([x]);
        seen.insert(x);
        while let Some(w) = queue.pop_front() {
            for a in group.ones() {
                let p = &self.indist[a];
                let b = p.block_of(w);
                if !done_blocks.insert((a, b)) {
                    continue;
                }
                for &y in p.members(b) {
                    if !seen.put(y as usize) {
                        queue.push_back(y as usize);
                    }
                }
            }
        }
        Ok(seen)
    }

    /// Partition of the worlds into classes of the group relation.
    pub fn group_partition(&self, group: &AgentSet) -> Partition {
        let mut uf = UnionFind::new(self.len());
        for a in group.ones() {
            for block in self.indist[a].blocks() {
                for &y in &block[1..] {
                    uf.union(block[0] as usize, y as usize);
                }
            }
        }
        let roots: Vec<usize> = (0..self.len()).map(|x| uf.find(x)).collect();
        Partition::from_labels(&roots)
    }

    /// Worlds whose whole group class lies inside `body`.
    pub fn box_partition(&self, classes: &Partition, body: &WorldSet) -> WorldSet {
        let mut out = self.empty_set();
        for block in classes.blocks() {
            if block.iter().all(|&y| body.contains(y as usize)) {
                out.extend(block.iter().map(|&y| y as usize));
            }
        }
        out
    }

    /// Greatest fixpoint of `U -> {x in body | every a-neighbour of x, a in
    /// group, lies in U}`, starting from all worlds. Returns the fixpoint and
    /// the number of applications of the operator until it was stable.
    pub fn gfp_common(&self, group: &AgentSet, body: &WorldSet) -> (WorldSet, usize) {
        let mut current = self.full_set();
        let mut steps = 0;
        loop {
            steps += 1;
            let mut next = body.clone();
            for a in group.ones() {
                for block in self.indist[a].blocks() {
                    if block.iter().any(|&y| !current.contains(y as usize)) {
                        for &y in block {
                            next.set(y as usize, false);
                        }
                    }
                }
            }
            if next == current {
                return (current, steps);
            }
            current = next;
        }
    }

    /// Restriction to the worlds of `keep`, with induced relations.
    pub fn restrict(&self, keep: &WorldSet) -> Frame {
        let idx: Vec<usize> = keep.ones().collect();
        let worlds = idx.iter().map(|&x| self.worlds[x].clone()).collect();
        let valuation = self
            .valuation
            .iter()
            .map(|(a, s)| {
                let mut t = FixedBitSet::with_capacity(idx.len());
                for (i, &x) in idx.iter().enumerate() {
                    t.set(i, s.contains(x));
                }
                (a.clone(), t)
            })
            .collect();
        let indist = self.indist.iter().map(|p| p.restrict(&idx)).collect();
        Frame { worlds, valuation, indist }
    }
}

pub(crate) fn complement(s: &WorldSet) -> WorldSet {
    let mut c = s.clone();
    c.toggle_range(..);
    c
}

/// A finite CIEL model: a frame whose agents come from an agent model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CielModel {
    frame: Frame,
    agents: AgentModel,
}

impl CielModel {
    /// `frame.indist()[i]` is the relation of agent `i` of `agents`.
    pub fn new(frame: Frame, agents: AgentModel) -> Result<Self, ModelError> {
        if frame.indist.len() != agents.len() {
            return Err(ModelError::Malformed(format!(
                "{} relations for {} agents",
                frame.indist.len(),
                agents.len()
            )));
        }
        let mut seen = HashSet::new();
        for a in agents.agents() {
            if !seen.insert(&a.name) {
                return Err(ModelError::DuplicateAgent(a.name.clone()));
            }
        }
        if let Some(bad) = agents.theory_violations().first() {
            return Err(ModelError::TheoryViolation(bad.to_string()));
        }
        Ok(CielModel { frame, agents })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn agent_model(&self) -> &AgentModel {
        &self.agents
    }

    pub fn worlds(&self) -> &[String] {
        self.frame.worlds()
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.frame.world_index(name)
    }

    pub fn group_reach(&self, group: &AgentSet, x: usize) -> Result<WorldSet, ModelError> {
        self.frame.group_reach(group, x)
    }

    /// Truth of `phi` at world `x`, evaluating each `C[psi] body` by
    /// collecting the group class of the current world.
    pub fn check(&self, x: usize, phi: &WorldFormula) -> Result<bool, ModelError> {
        self.frame.check_world(x)?;
        let mut memo = HashMap::new();
        Ok(self.check_at(x, phi, &mut memo))
    }

    fn check_at(
        &self,
        x: usize,
        phi: &WorldFormula,
        memo: &mut HashMap<(usize, *const WorldFormula), bool>,
    ) -> bool {
        let key = (x, phi as *const WorldFormula);
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let v = match phi {
            WorldFormula::Falsum => false,
            WorldFormula::Atom(a) => self.frame.valuation.get(a).is_some_and(|s| s.contains(x)),
            WorldFormula::Not(f) => !self.check_at(x, f, memo),
            WorldFormula::And(a, b) => self.check_at(x, a, memo) && self.check_at(x, b, memo),
            WorldFormula::C(psi, body) => {
                let group = self.agents.denote(psi);
                let reach = self
                    .frame
                    .group_reach(&group, x)
                    .expect("world index checked by caller");
                reach.ones().all(|y| self.check_at(y, body, memo))
            }
        };
        memo.insert(key, v);
        v
    }

    /// Set of worlds satisfying `phi`.
    pub fn extension(&self, phi: &WorldFormula) -> WorldSet {
        Evaluator::new(self).extension(phi)
    }

    /// Set of worlds satisfying `phi`, computing every common-knowledge
    /// subformula as a greatest fixpoint.
    pub fn check_gfp(&self, phi: &WorldFormula) -> WorldSet {
        match phi {
            WorldFormula::Falsum => self.frame.empty_set(),
            WorldFormula::Atom(a) => self.frame.atom_extension(a),
            WorldFormula::Not(f) => complement(&self.check_gfp(f)),
            WorldFormula::And(a, b) => {
                let mut s = self.check_gfp(a);
                s.intersect_with(&self.check_gfp(b));
                s
            }
            WorldFormula::C(psi, body) => {
                let body = self.check_gfp(body);
                self.frame.gfp_common(&self.agents.denote(psi), &body).0
            }
        }
    }

    /// Restriction to the worlds of `keep`.
    pub fn restrict(&self, keep: &WorldSet) -> CielModel {
        CielModel {
            frame: self.frame.restrict(keep),
            agents: self.agents.clone(),
        }
    }

    /// Submodel generated by `x` under the relation of all agents.
    pub fn generated_submodel(&self, x: usize) -> Result<CielModel, ModelError> {
        let reach = self.group_reach(&self.agents.all(), x)?;
        Ok(self.restrict(&reach))
    }
}

/// Memoizing evaluator over one CIEL model. Group classes are cached per
/// agent set and extensions per formula.
pub struct Evaluator<'m> {
    model: &'m CielModel,
    groups: HashMap<AgentSet, Partition>,
    memo: HashMap<WorldFormula, WorldSet>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m CielModel) -> Self {
        Evaluator {
            model,
            groups: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    pub fn extension(&mut self, phi: &WorldFormula) -> WorldSet {
        if let Some(s) = self.memo.get(phi) {
            return s.clone();
        }
        let frame = &self.model.frame;
        let s = match phi {
            WorldFormula::Falsum => frame.empty_set(),
            WorldFormula::Atom(a) => frame.atom_extension(a),
            WorldFormula::Not(f) => complement(&self.extension(f)),
            WorldFormula::And(a, b) => {
                let mut s = self.extension(a);
                s.intersect_with(&self.extension(b));
                s
            }
            WorldFormula::C(psi, body) => {
                let body = self.extension(body);
                let group = self.model.agents.denote(psi);
                let classes = self
                    .groups
                    .entry(group)
                    .or_insert_with_key(|g| frame.group_partition(g));
                frame.box_partition(classes, &body)
            }
        };
        self.memo.insert(phi.clone(), s.clone());
        s
    }

    pub fn holds(&mut self, x: usize, phi: &WorldFormula) -> bool {
        self.extension(phi).contains(x)
    }
}

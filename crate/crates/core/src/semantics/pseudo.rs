use std::collections::HashMap;

use super::{complement, CielModel, Frame, ModelError, WorldSet};
use crate::agentlogic::{AgentModel, AgentSet};
use crate::formula::WorldFormula;
use crate::partition::Partition;

/// Worlds and an agent model with one equivalence relation per agent set,
/// not necessarily induced by individual agents. Sets without an explicit
/// relation are related by identity only.
#[derive(Debug, Clone)]
pub struct PseudoModel {
    frame: Frame,
    agents: AgentModel,
    by_set: HashMap<AgentSet, Partition>,
}

impl PseudoModel {
    /// `frame` supplies worlds and valuation; its per-agent relations are
    /// ignored.
    pub fn new(frame: Frame, agents: AgentModel, by_set: HashMap<AgentSet, Partition>) -> Result<Self, ModelError> {
        if by_set.values().any(|p| p.len() != frame.len()) {
            return Err(ModelError::Malformed("relation size differs from world count".into()));
        }
        Ok(PseudoModel { frame, agents, by_set })
    }

    /// The pseudo-model of a model, with group relations for `sets`.
    pub fn from_model<'a, I: IntoIterator<Item = &'a AgentSet>>(m: &CielModel, sets: I) -> Self {
        let by_set = sets
            .into_iter()
            .map(|s| (s.clone(), m.frame().group_partition(s)))
            .collect();
        PseudoModel {
            frame: m.frame().clone(),
            agents: m.agent_model().clone(),
            by_set,
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn relation(&self, set: &AgentSet) -> Option<&Partition> {
        self.by_set.get(set)
    }

    pub fn extension(&self, phi: &WorldFormula) -> WorldSet {
        match phi {
            WorldFormula::Falsum => self.frame.empty_set(),
            WorldFormula::Atom(a) => self.frame.atom_extension(a),
            WorldFormula::Not(f) => complement(&self.extension(f)),
            WorldFormula::And(a, b) => {
                let mut s = self.extension(a);
                s.intersect_with(&self.extension(b));
                s
            }
            WorldFormula::C(psi, body) => {
                let body = self.extension(body);
                match self.by_set.get(&self.agents.denote(psi)) {
                    Some(p) => self.frame.box_partition(p, &body),
                    None => body,
                }
            }
        }
    }

    pub fn check(&self, x: usize, phi: &WorldFormula) -> Result<bool, ModelError> {
        if x >= self.frame.len() {
            return Err(ModelError::UnknownWorld(format!("#{x}")));
        }
        Ok(self.extension(phi).contains(x))
    }
}

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::{AgentFormula, WorldFormula};

pub const DEFAULT_CLOSURE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("closure exceeds {cap} formulas")]
    CapExceeded { cap: usize },
}

/// The closure of a root formula: closed under world subformulas, normalized
/// negation, and re-indexing of every `C[chi] phi` by each formula of the
/// agent closure.
#[derive(Debug, Clone)]
pub struct ClosureSet {
    root: WorldFormula,
    formulas: Vec<WorldFormula>,
    index: HashMap<WorldFormula, usize>,
    agent_closure: Vec<AgentFormula>,
}

impl ClosureSet {
    pub fn root(&self) -> &WorldFormula {
        &self.root
    }

    /// Members in insertion order; the root is always at index 0.
    pub fn formulas(&self) -> &[WorldFormula] {
        &self.formulas
    }

    pub fn agent_closure(&self) -> &[AgentFormula] {
        &self.agent_closure
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn contains(&self, f: &WorldFormula) -> bool {
        self.index.contains_key(f)
    }

    pub fn index_of(&self, f: &WorldFormula) -> Option<usize> {
        self.index.get(f).copied()
    }
}

/// Least set containing `root` closed under the three closure rules.
pub fn closure(
    root: &WorldFormula,
    agent_closure: &[AgentFormula],
    cap: usize,
) -> Result<ClosureSet, ClosureError> {
    let mut set = ClosureSet {
        root: root.clone(),
        formulas: Vec::new(),
        index: HashMap::new(),
        agent_closure: agent_closure.to_vec(),
    };
    let mut bodies_seen: HashSet<WorldFormula> = HashSet::new();
    let mut next = 0;
    push(&mut set, root.clone(), cap)?;
    while next < set.formulas.len() {
        let f = set.formulas[next].clone();
        next += 1;
        push(&mut set, f.nneg(), cap)?;
        match &f {
            WorldFormula::Falsum | WorldFormula::Atom(_) => {}
            WorldFormula::Not(g) => push(&mut set, (**g).clone(), cap)?,
            WorldFormula::And(a, b) => {
                push(&mut set, (**a).clone(), cap)?;
                push(&mut set, (**b).clone(), cap)?;
            }
            WorldFormula::C(_, body) => {
                push(&mut set, (**body).clone(), cap)?;
                if bodies_seen.insert((**body).clone()) {
                    for psi in agent_closure {
                        push(&mut set, WorldFormula::C(psi.clone(), body.clone()), cap)?;
                    }
                }
            }
        }
    }
    Ok(set)
}

fn push(set: &mut ClosureSet, f: WorldFormula, cap: usize) -> Result<(), ClosureError> {
    if set.index.contains_key(&f) {
        return Ok(());
    }
    if set.formulas.len() >= cap {
        return Err(ClosureError::CapExceeded { cap });
    }
    set.index.insert(f.clone(), set.formulas.len());
    set.formulas.push(f);
    Ok(())
}

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;

use super::{complement, Frame, ModelError, WorldSet};
use crate::translate::GelFormula;

/// A finite GEL model: a frame whose relations belong to named agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GelModel {
    frame: Frame,
    names: Vec<String>,
}

impl GelModel {
    /// `frame.indist()[i]` is the relation of `names[i]`.
    pub fn new(frame: Frame, names: Vec<String>) -> Result<Self, ModelError> {
        if frame.indist().len() != names.len() {
            return Err(ModelError::Malformed(format!(
                "{} relations for {} names",
                frame.indist().len(),
                names.len()
            )));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(ModelError::DuplicateAgent(n.clone()));
            }
        }
        Ok(GelModel { frame, names })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    fn group(&self, names: &std::collections::BTreeSet<String>) -> Result<FixedBitSet, ModelError> {
        let mut s = FixedBitSet::with_capacity(self.names.len());
        for n in names {
            let i = self
                .names
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| ModelError::UnknownAgent(n.clone()))?;
            s.insert(i);
        }
        Ok(s)
    }

    /// Truth of `phi` at `x`; the group relation of `G` is the closure of the
    /// union of its members' relations.
    pub fn check_gel(&self, x: usize, phi: &GelFormula) -> Result<bool, ModelError> {
        self.frame.check_world(x)?;
        Ok(self.extension(phi)?.contains(x))
    }

    pub fn extension(&self, phi: &GelFormula) -> Result<WorldSet, ModelError> {
        let mut memo = HashMap::new();
        self.ext(phi, &mut memo)
    }

    fn ext(&self, phi: &GelFormula, memo: &mut HashMap<GelFormula, WorldSet>) -> Result<WorldSet, ModelError> {
        if let Some(s) = memo.get(phi) {
            return Ok(s.clone());
        }
        let s = match phi {
            GelFormula::Falsum => self.frame.empty_set(),
            GelFormula::Atom(a) => self.frame.atom_extension(a),
            GelFormula::Not(f) => complement(&self.ext(f, memo)?),
            GelFormula::And(a, b) => {
                let mut s = self.ext(a, memo)?;
                s.intersect_with(&self.ext(b, memo)?);
                s
            }
            GelFormula::C(g, body) => {
                let body = self.ext(body, memo)?;
                let group = self.group(g)?;
                let mut out = self.frame.empty_set();
                for x in 0..self.len() {
                    let reach = self.frame.group_reach(&group, x)?;
                    if reach.is_subset(&body) {
                        out.insert(x);
                    }
                }
                out
            }
        };
        memo.insert(phi.clone(), s.clone());
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::formula::Boolean;
    use crate::translate::gel_model_from_pairs;

    fn g(s: &str) -> GelFormula {
        GelFormula::parse(s).unwrap()
    }

    fn chain() -> GelModel {
        gel_model_from_pairs(
            3,
            [("p".to_string(), vec![0, 1])].into_iter().collect(),
            BTreeMap::from([("a".to_string(), vec![(0, 1)]), ("b".to_string(), vec![(1, 2)])]),
        )
        .unwrap()
    }

    #[test]
    fn group_cases() {
        let m = chain();
        assert!(m.check_gel(0, &g("C{a} p")).unwrap());
        assert!(!m.check_gel(0, &g("C{a, b} p")).unwrap());
        assert!(!m.check_gel(1, &g("C{b} p")).unwrap());
        assert!(m.check_gel(2, &g("C{a} (p | ~p)")).unwrap());
        assert!(m.check_gel(0, &g("P{b} ~p | p")).unwrap());
        assert!(matches!(m.check_gel(0, &g("C{c} p")), Err(ModelError::UnknownAgent(_))));
        assert!(matches!(m.check_gel(5, &g("p")), Err(ModelError::UnknownWorld(_))));
        assert!(!m.check_gel(0, &g("C{a} p").neg()).unwrap());
    }
}

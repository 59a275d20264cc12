//! Satisfiability and validity by type elimination.
//!
//! Types are the coherent, maximal subsets of the closure. Two types are
//! `a`-related when they contain the same common-knowledge formulas whose
//! index denotes `a`, which makes every relation an equivalence. A type
//! that lacks `C[psi] phi` must reach, through agents denoted by `psi`, a
//! surviving type lacking `phi`; types failing such an obligation are
//! deleted until nothing changes. The survivors form a model in which each
//! type satisfies exactly its members.

pub mod gel;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::agentlogic::{filtered_model, AgentError, AgentSet, AgentTheory, FilteredAgentModel};
use crate::formula::{closure, ClosureError, ClosureSet, WorldFormula};
use crate::partition::{Partition, UnionFind};
use crate::semantics::{CielModel, Evaluator, Frame};

pub use gel::gel_sat;

/// Default bound on the closure size for full type enumeration.
pub const DEFAULT_SIGMA_CAP: usize = 256;
/// Default bound on the number of enumerated types.
pub const DEFAULT_TYPE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub closure: usize,
    pub types: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            closure: DEFAULT_SIGMA_CAP,
            types: DEFAULT_TYPE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Agents(#[from] AgentError),
    #[error("more than {cap} types")]
    TypeCap { cap: usize },
}

impl DecideError {
    /// Whether the error is a resource limit rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            DecideError::Closure(_) | DecideError::TypeCap { .. } | DecideError::Agents(AgentError::TooManyAtoms { .. })
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stats {
    pub sigma: usize,
    pub agents: usize,
    pub types: usize,
    pub survivors: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone)]
pub enum SatResult {
    Sat {
        witness: CielModel,
        start: usize,
        stats: Stats,
    },
    Unsat {
        stats: Stats,
    },
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat { .. })
    }

    pub fn stats(&self) -> &Stats {
        match self {
            SatResult::Sat { stats, .. } | SatResult::Unsat { stats } => stats,
        }
    }
}

/// How membership of a closure formula is decided during enumeration.
#[derive(Debug, Clone)]
enum Kind {
    Falsum,
    Atom,
    Not(usize),
    And(usize, usize),
    C { body: usize, denote: AgentSet },
}

/// All coherent types of a closure, with per-agent equivalence classes.
#[derive(Debug, Clone)]
pub struct TypeSpace {
    sigma: ClosureSet,
    agents: FilteredAgentModel,
    kinds: Vec<Kind>,
    types: Vec<FixedBitSet>,
    /// `classes[a][t]`: class of type `t` under agent `a`.
    classes: Vec<Vec<u32>>,
}

impl TypeSpace {
    pub fn sigma(&self) -> &ClosureSet {
        &self.sigma
    }

    pub fn agents(&self) -> &FilteredAgentModel {
        &self.agents
    }

    pub fn types(&self) -> &[FixedBitSet] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn related(&self, agent: usize, s: usize, t: usize) -> bool {
        self.classes[agent][s] == self.classes[agent][t]
    }

    /// Common-knowledge members of the closure, each with its body and the
    /// set of agents its index denotes.
    fn obligations(&self) -> Vec<(usize, usize, &AgentSet)> {
        self.kinds
            .iter()
            .enumerate()
            .filter_map(|(i, k)| match k {
                Kind::C { body, denote } => Some((i, *body, denote)),
                _ => None,
            })
            .collect()
    }
}

/// Filtered agent model and closure for `rho`.
pub fn prepare(
    rho: &WorldFormula,
    theory: &AgentTheory,
    caps: Caps,
) -> Result<(ClosureSet, FilteredAgentModel), DecideError> {
    let agents = filtered_model(&rho.agent_subformulae(), theory)?;
    let sigma = closure(rho, &agents.clo_ag(), caps.closure)?;
    Ok((sigma, agents))
}

/// Enumerate every coherent type of `sigma`.
///
/// Formulas are decided in order of size. Negations and conjunctions follow
/// from their parts. Atoms branch. A common-knowledge formula is forced by
/// the coherence conditions where they apply and branches otherwise; the
/// forced values never conflict, so every branch ends in a type.
pub fn enumerate_types(
    sigma: &ClosureSet,
    agents: &FilteredAgentModel,
    cap: usize,
) -> Result<TypeSpace, DecideError> {
    let n = sigma.len();
    let idx = |f: &WorldFormula| sigma.index_of(f).expect("closure is subformula-closed");
    let kinds: Vec<Kind> = sigma
        .formulas()
        .iter()
        .map(|f| match f {
            WorldFormula::Falsum => Kind::Falsum,
            WorldFormula::Atom(_) => Kind::Atom,
            WorldFormula::Not(g) => Kind::Not(idx(g)),
            WorldFormula::And(a, b) => Kind::And(idx(a), idx(b)),
            WorldFormula::C(psi, body) => Kind::C {
                body: idx(body),
                denote: agents.denote(psi),
            },
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (sigma.formulas()[i].size(), i));
    let base: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| !matches!(kinds[i], Kind::Not(_)))
        .collect();
    let negations: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| matches!(kinds[i], Kind::Not(_)))
        .collect();
    let mut position = vec![usize::MAX; n];
    for (p, &i) in base.iter().enumerate() {
        position[i] = p;
    }
    // Same-body C-formulas decided earlier, with the inclusion relations
    // between their denotations.
    let mut peers: Vec<Vec<(usize, bool, bool)>> = vec![Vec::new(); n];
    for &i in &base {
        if let Kind::C { body, denote } = &kinds[i] {
            for &j in &base[..position[i]] {
                if let Kind::C { body: b2, denote: d2 } = &kinds[j] {
                    if b2 == body {
                        peers[i].push((j, denote.is_subset(d2), d2.is_subset(denote)));
                    }
                }
            }
        }
    }

    let mut enumerator = Enumerator {
        kinds: &kinds,
        base: &base,
        negations: &negations,
        peers: &peers,
        cap,
        out: Vec::new(),
    };
    enumerator.run(0, &mut FixedBitSet::with_capacity(n))?;
    let types = enumerator.out;
    let classes = agent_classes(&kinds, &types, agents.agents().len());
    Ok(TypeSpace {
        sigma: sigma.clone(),
        agents: agents.clone(),
        kinds,
        types,
        classes,
    })
}

struct Enumerator<'a> {
    kinds: &'a [Kind],
    base: &'a [usize],
    negations: &'a [usize],
    peers: &'a [Vec<(usize, bool, bool)>],
    cap: usize,
    out: Vec<FixedBitSet>,
}

impl Enumerator<'_> {
    fn member(&self, t: &FixedBitSet, i: usize) -> bool {
        match self.kinds[i] {
            Kind::Not(g) => !self.member(t, g),
            _ => t.contains(i),
        }
    }

    fn run(&mut self, step: usize, t: &mut FixedBitSet) -> Result<(), DecideError> {
        if step == self.base.len() {
            if self.out.len() == self.cap {
                return Err(DecideError::TypeCap { cap: self.cap });
            }
            let mut full = t.clone();
            for &i in self.negations {
                full.set(i, self.member(t, i));
            }
            self.out.push(full);
            return Ok(());
        }
        let i = self.base[step];
        let forced = match &self.kinds[i] {
            Kind::Falsum => Some(false),
            Kind::Atom => None,
            Kind::Not(_) => unreachable!("negations are derived"),
            Kind::And(a, b) => Some(self.member(t, *a) && self.member(t, *b)),
            Kind::C { body, denote } => {
                let body = self.member(t, *body);
                if denote.is_clear() {
                    Some(body)
                } else if !body {
                    Some(false)
                } else {
                    let up = self.peers[i].iter().any(|&(j, sub, _)| sub && t.contains(j));
                    let down = self.peers[i].iter().any(|&(j, _, sup)| sup && !t.contains(j));
                    debug_assert!(!(up && down), "coherence forcing conflict");
                    if up {
                        Some(true)
                    } else if down {
                        Some(false)
                    } else {
                        None
                    }
                }
            }
        };
        match forced {
            Some(v) => {
                t.set(i, v);
                self.run(step + 1, t)
            }
            None => {
                t.set(i, false);
                self.run(step + 1, t)?;
                t.set(i, true);
                self.run(step + 1, t)?;
                t.set(i, false);
                Ok(())
            }
        }
    }
}

/// Per agent, group types by the common-knowledge members whose index
/// denotes the agent.
fn agent_classes(kinds: &[Kind], types: &[FixedBitSet], agents: usize) -> Vec<Vec<u32>> {
    (0..agents)
        .map(|a| {
            let mut mask = FixedBitSet::with_capacity(kinds.len());
            for (i, k) in kinds.iter().enumerate() {
                if let Kind::C { denote, .. } = k {
                    if denote.contains(a) {
                        mask.insert(i);
                    }
                }
            }
            let mut ids: HashMap<FixedBitSet, u32> = HashMap::new();
            types
                .iter()
                .map(|t| {
                    let mut trace = t.clone();
                    trace.intersect_with(&mask);
                    let next = ids.len() as u32;
                    *ids.entry(trace).or_insert(next)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    pub alive: FixedBitSet,
    pub rounds: usize,
}

/// Delete types with unfulfilled obligations, in rounds, until stable.
pub fn eliminate(ts: &TypeSpace) -> Elimination {
    let n = ts.len();
    let mut alive = FixedBitSet::with_capacity(n);
    alive.insert_range(..);
    let mut groups: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
    for (c, body, denote) in ts.obligations() {
        groups.entry(denote.ones().collect()).or_default().push((c, body));
    }
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut doomed = Vec::new();
        for (group, obligations) in &groups {
            let mut uf = UnionFind::new(n);
            for &a in group {
                let mut first: HashMap<u32, usize> = HashMap::new();
                for t in alive.ones() {
                    let class = ts.classes[a][t];
                    let rep = *first.entry(class).or_insert(t);
                    uf.union(rep, t);
                }
            }
            let roots: Vec<usize> = (0..n).map(|t| uf.find(t)).collect();
            for &(c, body) in obligations {
                let mut refuted = FixedBitSet::with_capacity(n);
                for t in alive.ones() {
                    if !ts.types[t].contains(body) {
                        refuted.insert(roots[t]);
                    }
                }
                for t in alive.ones() {
                    if !ts.types[t].contains(c) && !refuted.contains(roots[t]) {
                        doomed.push(t);
                    }
                }
            }
        }
        if doomed.is_empty() {
            return Elimination { alive, rounds };
        }
        for t in doomed {
            alive.set(t, false);
        }
    }
}

/// Delete one type at a time, scanning candidates in `order` and searching
/// reachability afresh for every candidate. Used to check that the
/// surviving set does not depend on the deletion order.
pub fn eliminate_sequential(ts: &TypeSpace, order: &[usize]) -> FixedBitSet {
    let n = ts.len();
    let mut alive = FixedBitSet::with_capacity(n);
    alive.insert_range(..);
    let obligations = ts.obligations();
    let buckets: Vec<HashMap<u32, Vec<usize>>> = ts
        .classes
        .iter()
        .map(|classes| {
            let mut m: HashMap<u32, Vec<usize>> = HashMap::new();
            for (t, &c) in classes.iter().enumerate() {
                m.entry(c).or_default().push(t);
            }
            m
        })
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &t in order {
            if !alive.contains(t) {
                continue;
            }
            let unfulfilled = obligations.iter().any(|&(c, body, denote)| {
                !ts.types[t].contains(c)
                    && reach_types(ts, &buckets, &alive, denote, t)
                        .ones()
                        .all(|s| ts.types[s].contains(body))
            });
            if unfulfilled {
                alive.set(t, false);
                changed = true;
            }
        }
    }
    alive
}

fn reach_types(
    ts: &TypeSpace,
    buckets: &[HashMap<u32, Vec<usize>>],
    alive: &FixedBitSet,
    group: &AgentSet,
    start: usize,
) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(ts.len());
    seen.insert(start);
    let mut stack = vec![start];
    while let Some(s) = stack.pop() {
        for a in group.ones() {
            for &t in &buckets[a][&ts.classes[a][s]] {
                if alive.contains(t) && !seen.put(t) {
                    stack.push(t);
                }
            }
        }
    }
    seen
}

/// The model whose worlds are the types in `alive`.
pub fn witness_model(ts: &TypeSpace, alive: &FixedBitSet) -> CielModel {
    let keep: Vec<usize> = alive.ones().collect();
    let worlds: Vec<String> = keep.iter().map(|t| format!("t{t}")).collect();
    let mut valuation = BTreeMap::new();
    for (i, f) in ts.sigma.formulas().iter().enumerate() {
        if let WorldFormula::Atom(a) = f {
            let mut s = FixedBitSet::with_capacity(keep.len());
            for (w, &t) in keep.iter().enumerate() {
                s.set(w, ts.types[t].contains(i));
            }
            valuation.insert(a.clone(), s);
        }
    }
    let indist = ts
        .classes
        .iter()
        .map(|classes| Partition::from_labels(&keep.iter().map(|&t| classes[t]).collect::<Vec<_>>()))
        .collect();
    let frame = Frame::new(worlds, valuation, indist).expect("type names are distinct");
    CielModel::new(frame, ts.agents.model().clone()).expect("filtered agents satisfy the theory")
}

/// Check that each world of the witness satisfies exactly the closure
/// formulas of its type. Returns the first offending (world, formula).
pub fn truth_lemma_violation(
    ts: &TypeSpace,
    alive: &FixedBitSet,
    witness: &CielModel,
) -> Option<(usize, WorldFormula)> {
    let keep: Vec<usize> = alive.ones().collect();
    let mut eval = Evaluator::new(witness);
    for (i, f) in ts.sigma.formulas().iter().enumerate() {
        let ext = eval.extension(f);
        for (w, &t) in keep.iter().enumerate() {
            if ext.contains(w) != ts.types[t].contains(i) {
                return Some((w, f.clone()));
            }
        }
    }
    None
}

/// Decide satisfiability of `rho` under `theory`. A satisfiable formula
/// comes with a witness model and a world satisfying it; the witness is
/// checked against the Truth Lemma before it is returned.
pub fn sat(rho: &WorldFormula, theory: &AgentTheory, caps: Caps) -> Result<SatResult, DecideError> {
    let (sigma, agents) = prepare(rho, theory, caps)?;
    let ts = enumerate_types(&sigma, &agents, caps.types)?;
    let elim = eliminate(&ts);
    let stats = Stats {
        sigma: sigma.len(),
        agents: agents.agents().len(),
        types: ts.len(),
        survivors: elim.alive.count_ones(..),
        rounds: elim.rounds,
    };
    // the root is closure member 0
    let Some(start_type) = elim.alive.ones().find(|&t| ts.types[t].contains(0)) else {
        return Ok(SatResult::Unsat { stats });
    };
    let witness = witness_model(&ts, &elim.alive);
    if let Some((w, f)) = truth_lemma_violation(&ts, &elim.alive, &witness) {
        panic!("truth lemma fails at world {w} for `{f}`");
    }
    let start = elim.alive.ones().position(|t| t == start_type).expect("start is alive");
    assert!(witness.check(start, rho).expect("start is a world"));
    Ok(SatResult::Sat { witness, start, stats })
}

/// `phi` is valid iff its normalized negation is unsatisfiable.
pub fn valid(phi: &WorldFormula, theory: &AgentTheory, caps: Caps) -> Result<bool, DecideError> {
    Ok(!sat(&phi.nneg(), theory, caps)?.is_sat())
}

/// Closure members in enumeration order, for diagnostics.
pub fn describe_type(ts: &TypeSpace, t: usize) -> BTreeSet<String> {
    ts.types[t].ones().map(|i| ts.sigma.formulas()[i].to_string()).collect()
}

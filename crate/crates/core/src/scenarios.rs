//! The n x k muddy children: an n x k matrix of bits, agents blind to one
//! bit per row, and the common knowledge gained per communication round.
//!
//! World atoms are `p_j_i` (bit `i` of row `j` is set) and agent atoms are
//! `h_j_i` (the agent cannot see that bit), both counted from 1.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agentlogic::{Agent, AgentModel, AgentTheory};
use crate::formula::{AgentFormula, Boolean, WorldFormula};
use crate::partition::Partition;
use crate::semantics::{CielModel, Evaluator, Frame, ModelError};

/// Largest `k^n * 2^(n k)` accepted by [`build_puzzle_model`].
pub const MAX_PUZZLE_SIZE: u64 = 1 << 22;
/// Most worlds whose subsets [`local_countermodel`] scans.
pub const MAX_SCAN_WORLDS: usize = 16;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid puzzle: {0}")]
    Spec(String),
    #[error("puzzle too large: {0}")]
    Cap(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuzzleSpec {
    n: usize,
    k: usize,
    rounds: Vec<usize>,
}

impl PuzzleSpec {
    /// `rounds[j]` counts the rounds already held for row `j + 1`.
    pub fn new(n: usize, k: usize, rounds: Vec<usize>) -> Result<Self, ScenarioError> {
        if n == 0 {
            return Err(ScenarioError::Spec("at least one row is needed".into()));
        }
        if k < 2 {
            return Err(ScenarioError::Spec("at least two columns are needed".into()));
        }
        if rounds.len() != n {
            return Err(ScenarioError::Spec(format!("{} counters for {n} rows", rounds.len())));
        }
        if let Some(x) = rounds.iter().find(|&&x| x >= k) {
            return Err(ScenarioError::Spec(format!("counter {x} is not below {k}")));
        }
        Ok(PuzzleSpec { n, k, rounds })
    }

    /// All counters zero.
    pub fn initial(n: usize, k: usize) -> Result<Self, ScenarioError> {
        Self::new(n, k, vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rounds(&self) -> &[usize] {
        &self.rounds
    }

    fn row(&self, j: usize) -> Result<(), ScenarioError> {
        if (1..=self.n).contains(&j) {
            Ok(())
        } else {
            Err(ScenarioError::Spec(format!("row {j} is not in 1..={}", self.n)))
        }
    }
}

pub fn bit_atom(j: usize, i: usize) -> String {
    format!("p_{j}_{i}")
}

pub fn blind_atom(j: usize, i: usize) -> String {
    format!("h_{j}_{i}")
}

fn bit(j: usize, i: usize) -> WorldFormula {
    WorldFormula::atom(bit_atom(j, i))
}

fn blind(j: usize, i: usize) -> AgentFormula {
    AgentFormula::atom(blind_atom(j, i))
}

fn everyone(f: WorldFormula) -> WorldFormula {
    WorldFormula::common(AgentFormula::verum(), f)
}

/// At most `x` bits of row `j` are set: the disjunction, over sets `H` of
/// columns with `|H| <= x` in order of size and then lexicographically, of
/// the conjunction fixing exactly the bits in `H` as set.
pub fn alpha_leq(j: usize, x: usize, spec: &PuzzleSpec) -> WorldFormula {
    let k = spec.k;
    let mut sets: Vec<Vec<usize>> = (0u64..1 << k)
        .map(|mask| (1..=k).filter(|i| mask >> (i - 1) & 1 == 1).collect::<Vec<_>>())
        .filter(|h| h.len() <= x)
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    WorldFormula::disjunction(sets.into_iter().map(|h| {
        WorldFormula::conjunction((1..=k).map(|i| if h.contains(&i) { bit(j, i) } else { bit(j, i).neg() }))
    }))
}

/// Agents that see a bit know its value, as common knowledge.
pub fn visibility_axiom(spec: &PuzzleSpec) -> WorldFormula {
    everyone(WorldFormula::conjunction(cells(spec).map(|(j, i)| {
        let seen = blind(j, i).neg();
        let p = bit(j, i);
        p.clone()
            .implies(WorldFormula::common(seen.clone(), p.clone()))
            .and(p.clone().neg().implies(WorldFormula::common(seen, p.neg())))
    })))
}

/// Common knowledge that every row has a set bit.
pub fn initial_knowledge(spec: &PuzzleSpec) -> WorldFormula {
    everyone(WorldFormula::conjunction((1..=spec.n).map(|j| alpha_leq(j, 0, spec).neg())))
}

/// Common knowledge that no agent knows any of its blind bits.
pub fn uncertainty_announcement(spec: &PuzzleSpec) -> WorldFormula {
    everyone(WorldFormula::conjunction(cells(spec).map(|(j, i)| uncertain(j, i))))
}

/// Common knowledge that no agent knows its blind bit in row `j`.
pub fn row_uncertainty(spec: &PuzzleSpec, j: usize) -> WorldFormula {
    everyone(WorldFormula::conjunction((1..=spec.k).map(|i| uncertain(j, i))))
}

fn uncertain(j: usize, i: usize) -> WorldFormula {
    let knows = |f| WorldFormula::common(blind(j, i), f);
    knows(bit(j, i)).neg().and(knows(bit(j, i).neg()).neg())
}

/// Accumulated common knowledge after the rounds counted by `spec`.
pub fn invariant_formula(spec: &PuzzleSpec) -> WorldFormula {
    everyone(WorldFormula::conjunction(
        spec.rounds.iter().enumerate().map(|(j, &x)| alpha_leq(j + 1, x, spec).neg()),
    ))
}

fn cells(spec: &PuzzleSpec) -> impl Iterator<Item = (usize, usize)> {
    let k = spec.k;
    (1..=spec.n).flat_map(move |j| (1..=k).map(move |i| (j, i)))
}

/// Exactly one blind bit per row.
pub fn puzzle_theory(spec: &PuzzleSpec) -> AgentTheory {
    let mut constraints = Vec::new();
    for j in 1..=spec.n {
        constraints.push(AgentFormula::disjunction((1..=spec.k).map(|i| blind(j, i))));
        for i in 1..=spec.k {
            for i2 in i + 1..=spec.k {
                constraints.push(blind(j, i).and(blind(j, i2)).neg());
            }
        }
    }
    AgentTheory::new(constraints).expect("satisfiable for k >= 1")
}

/// All matrices as worlds, one agent per invisibility type, each agent
/// relating the matrices that agree outside its blind bits.
pub fn build_puzzle_model(spec: &PuzzleSpec) -> Result<CielModel, ScenarioError> {
    let (n, k) = (spec.n, spec.k);
    let cells = n * k;
    let types = (k as u64).checked_pow(n as u32);
    let size = types.and_then(|t| 1u64.checked_shl(cells as u32).and_then(|w| t.checked_mul(w)));
    let types = match size {
        Some(s) if s <= MAX_PUZZLE_SIZE && cells < 32 => types.expect("checked") as usize,
        _ => return Err(ScenarioError::Cap(format!("{n} x {k} exceeds {MAX_PUZZLE_SIZE}"))),
    };
    let worlds = 1usize << cells;
    let pos = |j: usize, i: usize| (j - 1) * k + (i - 1);
    let names: Vec<String> = (0..worlds)
        .map(|m| {
            (1..=n)
                .map(|j| (1..=k).map(|i| if m >> pos(j, i) & 1 == 1 { '1' } else { '0' }).collect::<String>())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();
    let mut valuation = BTreeMap::new();
    for (j, i) in self::cells(spec) {
        let mut s = FixedBitSet::with_capacity(worlds);
        for m in 0..worlds {
            s.set(m, m >> pos(j, i) & 1 == 1);
        }
        valuation.insert(bit_atom(j, i), s);
    }
    let mut agents = Vec::with_capacity(types);
    let mut indist = Vec::with_capacity(types);
    for t in 0..types {
        // blind column per row, from the mixed-radix digits of t
        let cols: Vec<usize> = (0..n).map(|j| t / k.pow(j as u32) % k + 1).collect();
        let blind_mask = cols.iter().enumerate().fold(0usize, |acc, (j, &i)| acc | 1 << pos(j + 1, i));
        let labels: Vec<usize> = (0..worlds).map(|m| m & !blind_mask).collect();
        indist.push(Partition::from_labels(&labels));
        let name = format!("a{}", cols.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("_"));
        let valuation = self::cells(spec)
            .map(|(j, i)| (blind_atom(j, i), cols[j - 1] == i))
            .collect();
        agents.push(Agent { name, valuation });
    }
    let frame = Frame::new(names, valuation, indist)?;
    Ok(CielModel::new(frame, AgentModel::new(agents, puzzle_theory(spec)))?)
}

/// Premises of the round on row `j`: visibility, the accumulated knowledge
/// for row `j`, and the announced uncertainty in row `j`.
pub fn round_premises(spec: &PuzzleSpec, j: usize) -> Result<Vec<WorldFormula>, ScenarioError> {
    spec.row(j)?;
    let accumulated = everyone(alpha_leq(j, spec.rounds[j - 1], spec).neg());
    Ok(vec![visibility_axiom(spec), accumulated, row_uncertainty(spec, j)])
}

pub fn round_conclusion(spec: &PuzzleSpec, j: usize) -> Result<WorldFormula, ScenarioError> {
    spec.row(j)?;
    Ok(everyone(alpha_leq(j, spec.rounds[j - 1] + 1, spec).neg()))
}

/// A world of a submodel where all premises hold and the conclusion fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Countermodel {
    pub worlds: Vec<String>,
    pub world: String,
}

/// Search the submodels of `model` on every nonempty set of worlds for a
/// world refuting the local consequence `premises |= conclusion`.
pub fn local_countermodel(
    model: &CielModel,
    premises: &[WorldFormula],
    conclusion: &WorldFormula,
) -> Result<Option<Countermodel>, ScenarioError> {
    let w = model.len();
    if w > MAX_SCAN_WORLDS {
        return Err(ScenarioError::Cap(format!("{w} worlds exceed the scan limit of {MAX_SCAN_WORLDS}")));
    }
    let antecedent = WorldFormula::conjunction(premises.iter().cloned());
    for mask in 1u64..1 << w {
        let mut keep = FixedBitSet::with_capacity(w);
        for x in 0..w {
            keep.set(x, mask >> x & 1 == 1);
        }
        let sub = model.restrict(&keep);
        let mut ev = Evaluator::new(&sub);
        let mut bad = ev.extension(&antecedent);
        bad.difference_with(&ev.extension(conclusion));
        if let Some(x) = bad.ones().next() {
            return Ok(Some(Countermodel {
                worlds: sub.worlds().to_vec(),
                world: sub.worlds()[x].clone(),
            }));
        }
    }
    Ok(None)
}

/// Whether the round on row `j` yields `C[true] ~alpha_j^{<= x_j + 1}`.
pub fn check_round_inference(spec: &PuzzleSpec, j: usize) -> Result<bool, ScenarioError> {
    spec.row(j)?;
    if spec.rounds[j - 1] + 1 > spec.k {
        return Err(ScenarioError::Spec("no further round on this row".into()));
    }
    let model = build_puzzle_model(spec)?;
    let found = local_countermodel(&model, &round_premises(spec, j)?, &round_conclusion(spec, j)?)?;
    Ok(found.is_none())
}

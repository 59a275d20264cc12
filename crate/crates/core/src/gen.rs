//! Seeded random formulas and models for property tests and corpora.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agentlogic::{Agent, AgentModel, AgentTheory};
use crate::formula::{AgentFormula, Boolean, WorldFormula};
use crate::mucalc::{MuModel, EDGE, PI1, PI2};
use crate::partition::Partition;
use crate::semantics::{CielModel, Frame, GelModel};
use crate::translate::{gel_model_from_pairs, GelFormula};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vocabulary and nesting bound for random formulas.
#[derive(Debug, Clone)]
pub struct Shape {
    pub depth: usize,
    pub world_atoms: Vec<String>,
    pub agent_atoms: Vec<String>,
}

impl Shape {
    pub fn new(depth: usize, world_atoms: &[&str], agent_atoms: &[&str]) -> Self {
        Shape {
            depth,
            world_atoms: world_atoms.iter().map(|s| s.to_string()).collect(),
            agent_atoms: agent_atoms.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Default for Shape {
    fn default() -> Self {
        Shape::new(3, &["p", "q"], &["a", "b", "c"])
    }
}

pub fn agent_formula<R: Rng>(rng: &mut R, atoms: &[String], depth: usize) -> AgentFormula {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..10) {
            0 => AgentFormula::Falsum,
            1 => AgentFormula::verum(),
            _ => AgentFormula::atom(atoms.choose(rng).expect("agent atoms")),
        };
    }
    match rng.gen_range(0..3) {
        0 => agent_formula(rng, atoms, depth - 1).neg(),
        1 => agent_formula(rng, atoms, depth - 1).and(agent_formula(rng, atoms, depth - 1)),
        _ => agent_formula(rng, atoms, depth - 1).or(agent_formula(rng, atoms, depth - 1)),
    }
}

/// World formula of tree depth at most `shape.depth`, agent indices of
/// depth at most 2.
pub fn world_formula<R: Rng>(rng: &mut R, shape: &Shape) -> WorldFormula {
    world_at(rng, shape, shape.depth)
}

fn world_at<R: Rng>(rng: &mut R, shape: &Shape, depth: usize) -> WorldFormula {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_range(0..12) == 0 {
            WorldFormula::Falsum
        } else {
            WorldFormula::atom(shape.world_atoms.choose(rng).expect("world atoms"))
        };
    }
    match rng.gen_range(0..5) {
        0 => world_at(rng, shape, depth - 1).neg(),
        1 => world_at(rng, shape, depth - 1).and(world_at(rng, shape, depth - 1)),
        2 => world_at(rng, shape, depth - 1).or(world_at(rng, shape, depth - 1)),
        _ => common_at(rng, shape, depth),
    }
}

/// A formula `C[psi] f` with `f` of depth below `shape.depth`.
pub fn common_formula<R: Rng>(rng: &mut R, shape: &Shape) -> WorldFormula {
    common_at(rng, shape, shape.depth.max(1))
}

fn common_at<R: Rng>(rng: &mut R, shape: &Shape, depth: usize) -> WorldFormula {
    let psi = agent_formula(rng, &shape.agent_atoms, 2);
    WorldFormula::common(psi, world_at(rng, shape, depth - 1))
}

fn random_set<R: Rng>(rng: &mut R, n: usize, density: f64) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for x in 0..n {
        s.set(x, rng.gen_bool(density));
    }
    s
}

/// Equivalence given by random class labels.
fn random_partition<R: Rng>(rng: &mut R, n: usize) -> Partition {
    let blocks = rng.gen_range(1..=n.max(1));
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
    Partition::from_labels(&labels)
}

/// Model with 1..=`max_worlds` worlds and 1..=`max_agents` agents with
/// random valuations and equivalences, under the empty theory.
pub fn ciel_model<R: Rng>(rng: &mut R, shape: &Shape, max_worlds: usize, max_agents: usize) -> CielModel {
    let n = rng.gen_range(1..=max_worlds);
    let agents = rng.gen_range(1..=max_agents);
    let worlds = (0..n).map(|x| format!("w{x}")).collect();
    let valuation = shape
        .world_atoms
        .iter()
        .map(|p| (p.clone(), random_set(rng, n, 0.5)))
        .collect();
    let indist = (0..agents).map(|_| random_partition(rng, n)).collect();
    let agents = (0..agents)
        .map(|i| Agent {
            name: format!("g{i}"),
            valuation: shape.agent_atoms.iter().map(|a| (a.clone(), rng.gen_bool(0.5))).collect(),
        })
        .collect();
    let frame = Frame::new(worlds, valuation, indist).expect("generated frame");
    CielModel::new(frame, AgentModel::new(agents, AgentTheory::empty())).expect("generated model")
}

pub fn gel_formula<R: Rng>(rng: &mut R, names: &[String], atoms: &[String], depth: usize) -> GelFormula {
    if depth == 0 || rng.gen_bool(0.25) {
        return GelFormula::atom(atoms.choose(rng).expect("atoms"));
    }
    match rng.gen_range(0..4) {
        0 => gel_formula(rng, names, atoms, depth - 1).neg(),
        1 => gel_formula(rng, names, atoms, depth - 1).and(gel_formula(rng, names, atoms, depth - 1)),
        _ => {
            let group: Vec<&String> = loop {
                let g: Vec<&String> = names.iter().filter(|_| rng.gen_bool(0.5)).collect();
                if !g.is_empty() {
                    break g;
                }
            };
            GelFormula::common(group, gel_formula(rng, names, atoms, depth - 1))
        }
    }
}

/// GEL model over 1..=`max_worlds` worlds with random relations, later
/// closed to equivalences.
pub fn gel_model<R: Rng>(rng: &mut R, names: &[String], atoms: &[String], max_worlds: usize) -> GelModel {
    let n = rng.gen_range(1..=max_worlds);
    let valuation: BTreeMap<String, Vec<usize>> = atoms
        .iter()
        .map(|p| (p.clone(), (0..n).filter(|_| rng.gen_bool(0.5)).collect()))
        .collect();
    let relations = names
        .iter()
        .map(|a| {
            let pairs = (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .filter(|_| rng.gen_bool(0.2))
                .collect();
            (a.clone(), pairs)
        })
        .collect();
    gel_model_from_pairs(n, valuation, relations).expect("generated GEL model")
}

/// Mu-calculus model with random `edge`, `pi1`, `pi2` and atoms.
pub fn mu_model<R: Rng>(rng: &mut R, atoms: &[String], max_size: usize) -> MuModel {
    let n = rng.gen_range(1..=max_size);
    let domain = (0..n).map(|x| format!("d{x}")).collect();
    let programs = [EDGE, PI1, PI2]
        .into_iter()
        .map(|prog| {
            let pairs = (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .filter(|_| rng.gen_bool(0.25))
                .collect();
            (prog.to_string(), pairs)
        })
        .collect();
    let valuation = atoms.iter().map(|p| (p.clone(), random_set(rng, n, 0.5))).collect();
    MuModel::new(domain, programs, valuation)
}

//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use ciel_core::agentlogic::{entails, AgentTheory};
use ciel_core::decide::gel::gel_sat;
use ciel_core::decide::{sat, valid, Caps, SatResult};
use ciel_core::formula::{AgentFormula, Boolean, WorldFormula};
use ciel_core::gen::{self, Shape};
use ciel_core::mucalc::{ciel_model_to_mu, mu_model_to_ciel, translate_t};
use ciel_core::proofs::{
    check_derivation, gen_ind_n, instance_4, instance_5, instance_bot, instance_ind, instance_k, instance_t,
    Derivation, ProofErrorKind,
};
use ciel_core::scenarios::{
    build_puzzle_model, check_round_inference, local_countermodel, round_conclusion, round_premises, PuzzleSpec,
};
use ciel_core::semantics::CielModel;
use ciel_core::translate::{gel_model_to_ciel, gel_to_ciel, GelFormula};

const SEED: u64 = 0x00C1_E1A5;
const SOUNDNESS_INSTANCES: usize = 200;
const SOUNDNESS_MODELS: usize = 50;
const SOUNDNESS_DECIDED: usize = 20;
const SMALL_CLOSURE: usize = 40;
const FIXPOINT_PAIRS: usize = 500;
const GEL_TRUTH_PAIRS: usize = 200;
const GEL_CORPUS_NODES: usize = 6;
const T_PAIRS: usize = 200;
const T_REVERSE_PAIRS: usize = 100;
const T_SIZE_FACTOR: usize = 10;
const COMPACTNESS_MAX_M: usize = 2;
const PROOF_CORPUS_SIZE: usize = 10;

/// A satisfiable verdict with its witness, for the bounded model check.
struct Witnessed {
    formula: WorldFormula,
    witness: CielModel,
    start: usize,
    sigma: usize,
}

#[derive(Default)]
struct Witnesses(Vec<Witnessed>);

impl Witnesses {
    fn record(&mut self, formula: &WorldFormula, result: SatResult) {
        if let SatResult::Sat { witness, start, stats } = result {
            self.0.push(Witnessed { formula: formula.clone(), witness, start, sigma: stats.sigma });
        }
    }
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(budget: Duration, start: Instant) -> Result<(), String> {
    ensure(start.elapsed() <= budget, || format!("took {:.1?}, budget {budget:?}", start.elapsed()))
}

fn c(psi: &AgentFormula, f: WorldFormula) -> WorldFormula {
    WorldFormula::common(psi.clone(), f)
}

#[derive(Clone, Copy, Debug)]
enum Schema {
    T,
    Bot,
    K,
    Four,
    Five,
    Ind,
    Nec,
    Am,
}

const SCHEMATA: [Schema; 8] =
    [Schema::T, Schema::Bot, Schema::K, Schema::Four, Schema::Five, Schema::Ind, Schema::Nec, Schema::Am];

/// Components of one instantiation.
struct Parts {
    phi: WorldFormula,
    gamma: WorldFormula,
    psi: AgentFormula,
    chi: AgentFormula,
}

impl Schema {
    /// For rules, the premise (if any) and the conclusion.
    fn instance(self, p: &Parts) -> (Option<WorldFormula>, WorldFormula) {
        match self {
            Schema::T => (None, instance_t(&p.psi, &p.phi)),
            Schema::Bot => (None, instance_bot(&p.phi)),
            Schema::K => (None, instance_k(&p.psi, &p.phi, &p.gamma)),
            Schema::Four => (None, instance_4(&p.psi, &p.phi)),
            Schema::Five => (None, instance_5(&p.psi, &p.phi)),
            Schema::Ind => (None, instance_ind(&p.psi, &p.chi, &p.phi)),
            Schema::Nec => (Some(p.phi.clone()), c(&p.psi, p.phi.clone())),
            // chi is made to entail psi
            Schema::Am => (None, c(&p.psi, p.phi.clone()).implies(c(&p.chi, p.phi.clone()))),
        }
    }
}

fn random_parts<R: Rng>(rng: &mut R, schema: Schema, shape: &Shape) -> Parts {
    let mut phi = gen::world_formula(rng, shape);
    let gamma = gen::world_formula(rng, shape);
    let psi = gen::agent_formula(rng, &shape.agent_atoms, 2);
    let mut chi = gen::agent_formula(rng, &shape.agent_atoms, 2);
    match schema {
        Schema::Am if !entails(&chi, &psi, &AgentTheory::empty()) => chi = chi.and(psi.clone()),
        // half of the premises are themselves valid instances
        Schema::Nec if rng.gen_bool(0.5) => phi = instance_t(&chi, &phi),
        _ => {}
    }
    Parts { phi, gamma, psi, chi }
}

fn small_parts<R: Rng>(rng: &mut R, schema: Schema) -> Parts {
    const WORLD: [&str; 8] = ["p", "q", "~p", "~q", "p & q", "p | q", "p -> q", "false"];
    const AGENT: [&str; 8] = ["a", "~a", "b", "~b", "a & b", "a | b", "true", "false"];
    let a = |rng: &mut R| AgentFormula::parse(AGENT.choose(rng).unwrap()).unwrap();
    let base = |rng: &mut R| WorldFormula::parse(WORLD.choose(rng).unwrap()).unwrap();
    let w = |rng: &mut R| match rng.gen_range(0..4) {
        0 => base(rng).and(base(rng)),
        1 => WorldFormula::common(a(rng), base(rng)),
        _ => base(rng),
    };
    let mut parts = Parts { phi: w(rng), gamma: w(rng), psi: a(rng), chi: a(rng) };
    match schema {
        Schema::Am if !entails(&parts.chi, &parts.psi, &AgentTheory::empty()) => {
            parts.chi = parts.chi.clone().and(parts.psi.clone())
        }
        Schema::Nec => parts.phi = instance_t(&parts.chi, &parts.phi),
        _ => {}
    }
    parts
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = gen::rng(SEED);
    let shape = Shape::new(3, &["p", "q"], &["a", "b", "c"]);
    let models: Vec<CielModel> = (0..SOUNDNESS_MODELS).map(|_| gen::ciel_model(&mut rng, &shape, 8, 4)).collect();
    let empty = AgentTheory::empty();
    let mut checks = 0usize;
    let mut premises_held = 0usize;
    for schema in SCHEMATA {
        for i in 0..SOUNDNESS_INSTANCES {
            let parts = random_parts(&mut rng, schema, &shape);
            let (premise, conclusion) = schema.instance(&parts);
            for (mi, m) in models.iter().enumerate() {
                let ext = m.extension(&conclusion);
                let globally = |f: &WorldFormula| m.extension(f).count_ones(..) == m.len();
                let countermodel = match &premise {
                    Some(pr) if globally(pr) => {
                        premises_held += 1;
                        ext.count_ones(..) != m.len()
                    }
                    Some(_) => false,
                    None => ext.count_ones(..) != m.len(),
                };
                checks += 1;
                ensure(!countermodel, || format!("{schema:?} instance {i} fails in model {mi}: {conclusion}"))?;
            }
        }
        let caps = Caps { closure: SMALL_CLOSURE, ..Caps::default() };
        let mut decided = BTreeSet::new();
        let mut tries = 0;
        while decided.len() < SOUNDNESS_DECIDED {
            tries += 1;
            ensure(tries <= 5000, || format!("{schema:?}: only {} small instances within closure {SMALL_CLOSURE}", decided.len()))?;
            let (premise, conclusion) = schema.instance(&small_parts(&mut rng, schema));
            if decided.contains(&conclusion) {
                continue;
            }
            if let Some(pr) = &premise {
                match valid(pr, &empty, caps) {
                    Ok(true) => {}
                    Ok(false) => return Err(format!("{schema:?}: premise {pr} is not valid")),
                    Err(e) if e.is_resource_limit() => continue,
                    Err(e) => return Err(e.to_string()),
                }
            }
            match valid(&conclusion, &empty, caps) {
                Ok(true) => {
                    decided.insert(conclusion);
                }
                Ok(false) => return Err(format!("{schema:?}: {conclusion} reported invalid")),
                Err(e) if e.is_resource_limit() => continue,
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "{checks} model checks over {} schemata x {SOUNDNESS_INSTANCES} instances x {SOUNDNESS_MODELS} models, \
         0 countermodels ({premises_held} with rule premise true); {} decided valid",
        SCHEMATA.len(),
        SCHEMATA.len() * SOUNDNESS_DECIDED
    ))
}

fn fixpoint() -> Outcome {
    let start = Instant::now();
    let mut rng = gen::rng(SEED + 2);
    let shape = Shape::default();
    for i in 0..FIXPOINT_PAIRS {
        let m = gen::ciel_model(&mut rng, &shape, 8, 4);
        let phi = gen::common_formula(&mut rng, &shape);
        let gfp = m.check_gfp(&phi);
        for x in 0..m.len() {
            let pointwise = m.check(x, &phi).map_err(|e| e.to_string())?;
            ensure(pointwise == gfp.contains(x), || format!("pair {i}, world {x}: {phi}"))?;
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("{FIXPOINT_PAIRS}/{FIXPOINT_PAIRS} pairs agree"))
}

/// Every GEL formula over atoms p, q and groups of names a, b with at most
/// `nodes` syntax nodes and modal depth at most 2.
fn gel_corpus(nodes: usize) -> Vec<GelFormula> {
    let groups: [&[&str]; 3] = [&["a"], &["b"], &["a", "b"]];
    let mut by_size: Vec<Vec<GelFormula>> = vec![Vec::new(); nodes + 1];
    by_size[1] = vec![GelFormula::atom("p"), GelFormula::atom("q")];
    for n in 2..=nodes {
        let mut out = Vec::new();
        for f in &by_size[n - 1] {
            out.push(f.clone().neg());
            for g in groups {
                out.push(GelFormula::common(g.iter().copied(), f.clone()));
            }
        }
        for left in 1..n - 1 {
            for a in &by_size[left] {
                for b in &by_size[n - 1 - left] {
                    out.push(a.clone().and(b.clone()));
                }
            }
        }
        out.retain(|f| f.modal_depth() <= 2);
        by_size[n] = out;
    }
    by_size.into_iter().flatten().collect()
}

fn translation_q(witnesses: &mut Witnesses) -> Outcome {
    let start = Instant::now();
    let corpus = gel_corpus(GEL_CORPUS_NODES);
    let empty = AgentTheory::empty();
    let mut sat_count = 0;
    for phi in &corpus {
        let expected = gel_sat(phi).map_err(|e| e.to_string())?;
        let q = gel_to_ciel(phi);
        let result = sat(&q, &empty, Caps::default()).map_err(|e| format!("{phi}: {e}"))?;
        ensure(result.is_sat() == expected, || format!("{phi}: gel_sat {expected}, sat(q) {}", result.is_sat()))?;
        sat_count += usize::from(expected);
        witnesses.record(&q, result);
    }
    let mut rng = gen::rng(SEED + 3);
    let names = vec!["a".to_string(), "b".to_string()];
    let atoms = vec!["p".to_string(), "q".to_string()];
    for i in 0..GEL_TRUTH_PAIRS {
        let g = gen::gel_model(&mut rng, &names, &atoms, 6);
        let phi = gen::gel_formula(&mut rng, &names, &atoms, 2);
        let m = gel_model_to_ciel(&g);
        let q = gel_to_ciel(&phi);
        for x in 0..g.len() {
            let lhs = g.check_gel(x, &phi).map_err(|e| e.to_string())?;
            let rhs = m.check(x, &q).map_err(|e| e.to_string())?;
            ensure(lhs == rhs, || format!("pair {i}, world {x}: {phi}"))?;
        }
    }
    Ok(format!(
        "{} corpus formulas agree ({sat_count} satisfiable); {GEL_TRUTH_PAIRS}/{GEL_TRUTH_PAIRS} model pairs preserve truth; {:.1?}",
        corpus.len(),
        start.elapsed()
    ))
}

fn translation_t() -> Outcome {
    let start = Instant::now();
    let mut rng = gen::rng(SEED + 4);
    let shape = Shape::default();
    let mut worst = 0f64;
    for i in 0..T_PAIRS {
        let m = gen::ciel_model(&mut rng, &shape, 6, 3);
        let phi = gen::world_formula(&mut rng, &shape);
        let t = translate_t(&phi).map_err(|e| e.to_string())?;
        ensure(t.size() <= T_SIZE_FACTOR * phi.size(), || format!("|t({phi})| = {} > {T_SIZE_FACTOR}|phi|", t.size()))?;
        worst = worst.max(t.size() as f64 / phi.size() as f64);
        let enc = ciel_model_to_mu(&m);
        let ext = enc.model.eval_closed(&t);
        for x in 0..m.len() {
            let lhs = m.check(x, &phi).map_err(|e| e.to_string())?;
            ensure(lhs == ext.contains(enc.world(x)), || format!("pair {i}, world {x}: {phi}"))?;
        }
    }
    let mut atoms = shape.world_atoms.clone();
    atoms.extend(shape.agent_atoms.iter().cloned());
    for i in 0..T_REVERSE_PAIRS {
        let mu = gen::mu_model(&mut rng, &atoms, 6);
        let phi = gen::world_formula(&mut rng, &shape);
        let t = translate_t(&phi).map_err(|e| e.to_string())?;
        ensure(t.size() <= T_SIZE_FACTOR * phi.size(), || format!("|t({phi})| = {} > {T_SIZE_FACTOR}|phi|", t.size()))?;
        let back = mu_model_to_ciel(&mu);
        let ext = mu.eval_closed(&t);
        for x in 0..mu.len() {
            let lhs = back.check(x, &phi).map_err(|e| e.to_string())?;
            ensure(lhs == ext.contains(x), || format!("reverse pair {i}, element {x}: {phi}"))?;
        }
    }
    Ok(format!(
        "{T_PAIRS}/{T_PAIRS} forward, {T_REVERSE_PAIRS}/{T_REVERSE_PAIRS} reverse; max |t|/|phi| = {worst:.2}; {:.1?}",
        start.elapsed()
    ))
}

/// `~C[A | B] p` with every `C[D1] ... C[Dn] p`, `n <= m`, `Di` in {A, B}.
fn compactness_instance(m: usize) -> WorldFormula {
    let (a, b) = (AgentFormula::atom("A"), AgentFormula::atom("B"));
    let mut words = vec![WorldFormula::atom("p")];
    let mut layer = words.clone();
    for _ in 0..m {
        layer = layer.iter().flat_map(|f| [c(&a, f.clone()), c(&b, f.clone())]).collect();
        words.extend(layer.iter().cloned());
    }
    c(&a.or(b), WorldFormula::atom("p")).neg().and(WorldFormula::conjunction(words))
}

fn compactness(witnesses: &mut Witnesses) -> Outcome {
    let start = Instant::now();
    let mut sizes = Vec::new();
    for m in 0..=COMPACTNESS_MAX_M {
        let phi = compactness_instance(m);
        let result = sat(&phi, &AgentTheory::empty(), Caps::default()).map_err(|e| format!("m={m}: {e}"))?;
        let SatResult::Sat { witness, start: x, .. } = &result else {
            return Err(format!("m={m}: unsatisfiable"));
        };
        ensure(witness.check(*x, &phi).map_err(|e| e.to_string())?, || format!("m={m}: witness fails"))?;
        sizes.push(witness.len());
        witnesses.record(&phi, result);
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("m = 0..={COMPACTNESS_MAX_M} satisfiable, witness worlds {sizes:?}; {:.1?}", start.elapsed()))
}

fn bounded_models(witnesses: &Witnesses) -> Outcome {
    for w in &witnesses.0 {
        let bound_ok = w.sigma >= usize::BITS as usize - 1 || w.witness.len() <= 1usize << w.sigma;
        ensure(bound_ok, || format!("{}: {} worlds > 2^{}", w.formula, w.witness.len(), w.sigma))?;
        let holds = w.witness.check(w.start, &w.formula).map_err(|e| e.to_string())?;
        ensure(holds, || format!("{}: witness does not satisfy the formula", w.formula))?;
    }
    let largest = witnesses.0.iter().map(|w| w.witness.len()).max().unwrap_or(0);
    Ok(format!("{} witnesses within 2^|closure| and re-verified; largest has {largest} worlds", witnesses.0.len()))
}

fn muddy() -> Outcome {
    let start = Instant::now();
    for x in [0, 1] {
        let spec = PuzzleSpec::new(1, 3, vec![x]).map_err(|e| e.to_string())?;
        ensure(check_round_inference(&spec, 1).map_err(|e| e.to_string())?, || format!("round fails for x={x}"))?;
    }
    let spec = PuzzleSpec::new(1, 3, vec![0]).map_err(|e| e.to_string())?;
    let model = build_puzzle_model(&spec).map_err(|e| e.to_string())?;
    ensure(model.len() == 8 && model.agent_model().len() == 3, || "unexpected model shape".into())?;
    let mut premises = round_premises(&spec, 1).map_err(|e| e.to_string())?;
    premises.pop();
    let found = local_countermodel(&model, &premises, &round_conclusion(&spec, 1).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let Some(cm) = found else {
        return Err("negative control: inference holds without the uncertainty premise".into());
    };
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "x = 0, 1 hold on 8 worlds / 3 agents; without uncertainty refuted at {} in {{{}}}",
        cm.world,
        cm.worlds.join(", ")
    ))
}

fn proof_corpus() -> Result<Vec<(String, Derivation)>, String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/proofs");
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "proof"))
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&p).map_err(|e| e.to_string())?;
            let d = Derivation::parse(&text).map_err(|e| format!("{name}: {e}"))?;
            Ok((name, d))
        })
        .collect()
}

fn proofs() -> Outcome {
    let empty = AgentTheory::empty();
    let mut rng = gen::rng(SEED + 8);
    let shape = Shape::default();
    let mut generated = 0;
    for n in 0..=4 {
        for _ in 0..5 {
            let psis: Vec<AgentFormula> = (0..n).map(|_| gen::agent_formula(&mut rng, &shape.agent_atoms, 2)).collect();
            let phi = gen::world_formula(&mut rng, &Shape { depth: 2, ..shape.clone() });
            check_derivation(&gen_ind_n(&psis, &phi), &empty).map_err(|e| format!("ind n={n}: {e}"))?;
            generated += 1;
        }
    }
    let corpus = proof_corpus()?;
    ensure(corpus.len() == PROOF_CORPUS_SIZE, || format!("{} shipped derivations", corpus.len()))?;
    let mut proved_valid = 0;
    for (name, d) in &corpus {
        check_derivation(d, &empty).map_err(|e| format!("{name}: {e}"))?;
        let theory = AgentTheory::new(d.theory.clone()).map_err(|e| e.to_string())?;
        let conclusion = d.conclusion().ok_or_else(|| format!("{name}: empty"))?;
        match valid(conclusion, &theory, Caps::default()) {
            Ok(true) => proved_valid += 1,
            Ok(false) => return Err(format!("{name}: conclusion is not valid")),
            Err(e) if e.is_resource_limit() => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    let mut rejected = 0;
    for (name, d) in &corpus {
        let line = d.lines.len() / 2 + 1;
        let mut bad = d.clone();
        bad.lines[line - 1].formula = bad.lines[line - 1].formula.clone().neg();
        match check_derivation(&bad, &empty) {
            Err(e) if e.line == line && !matches!(e.kind, ProofErrorKind::Theory) => rejected += 1,
            Err(e) => return Err(format!("{name}: mutant at line {line} rejected at {e}")),
            Ok(()) => return Err(format!("{name}: mutant at line {line} accepted")),
        }
    }
    Ok(format!(
        "{generated} induction derivations (n = 0..=4) accepted; {} shipped derivations accepted, \
         {proved_valid} conclusions decided valid; {rejected}/{} mutants rejected at the corrupted line",
        corpus.len(),
        corpus.len()
    ))
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
    });
    let elapsed = start.elapsed();
    match outcome {
        Ok(detail) => {
            println!("criterion {n} ({name}): PASS [{elapsed:.1?}] {detail}");
            true
        }
        Err(why) => {
            println!("criterion {n} ({name}): FAIL [{elapsed:.1?}] {why}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut witnesses = Witnesses::default();
    let results = [
        run(1, "soundness", soundness),
        run(2, "fixpoint characterization", fixpoint),
        run(3, "lower-bound translation q", || translation_q(&mut witnesses)),
        run(4, "upper-bound translation t", translation_t),
        run(5, "compactness instances", || compactness(&mut witnesses)),
        run(6, "bounded model property", || bounded_models(&witnesses)),
        run(7, "muddy children", muddy),
        run(8, "proof objects", proofs),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! `ciel`: parse, model-check, decide, translate and prove.
//!
//! Exit status: 0 on success, 1 on a negative answer (false, UNSAT,
//! INVALID, rejected proof, failed round), 2 on usage or input errors,
//! 3 when a resource cap is hit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use ciel_core::agentlogic::{AgentError, AgentTheory};
use ciel_core::decide::{sat, Caps, DecideError, SatResult, DEFAULT_SIGMA_CAP, DEFAULT_TYPE_CAP};
use ciel_core::formula::{AgentFormula, Boolean, ParseError, WorldFormula};
use ciel_core::gen;
use ciel_core::mucalc::{translate_t, MuError, MuFormula};
use ciel_core::proofs::{check_derivation, gen_ind_n, Derivation, ProofError};
use ciel_core::scenarios::{self, PuzzleSpec, ScenarioError};
use ciel_core::semantics::{validate, CielModel, ModelError, ModelFile, PairStyle, ValidationMode};
use ciel_core::translate::{ciel_to_gel, gel_to_ciel, GelFormula, TranslateError};

#[derive(Parser)]
#[command(name = "ciel", version, about = "Common knowledge over agent formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print it back.
    Parse {
        /// Formula text, or `@path` to read it from a file.
        formula: String,
        #[arg(long, value_enum, default_value_t = Syntax::World)]
        syntax: Syntax,
        /// Print the syntax tree instead of the formula.
        #[arg(long)]
        ast: bool,
    },
    /// Evaluate a formula at a world of a model file.
    Check {
        formula: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        world: String,
        /// Reject relations that are not already equivalences.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        emit_dot: Option<PathBuf>,
    },
    /// Decide satisfiability; a witness model can be written out.
    Sat(Decide),
    /// Decide validity; a countermodel can be written out.
    Valid(Decide),
    /// Translate between group epistemic logic, this logic and the mu-calculus.
    Translate {
        #[arg(value_enum)]
        direction: Direction,
        formula: String,
        /// Model file whose agents interpret indices (ciel2gel).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Check a derivation file or print a generated induction derivation.
    Prove {
        #[arg(long, value_name = "FILE", conflicts_with = "ind", required_unless_present = "ind")]
        check: Option<PathBuf>,
        /// Derive the induction principle for N indices `s1`, ..., `sN`.
        #[arg(long, value_name = "N")]
        ind: Option<usize>,
        /// Body formula for `--ind`.
        #[arg(long, default_value = "p")]
        phi: String,
        #[arg(long)]
        theory: Option<PathBuf>,
    },
    /// The n x k muddy children.
    Muddy(Muddy),
    /// Print a random corpus.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value_t = GenKind::Formula)]
        kind: GenKind,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

#[derive(Args)]
struct Decide {
    formula: String,
    #[arg(long)]
    theory: Option<PathBuf>,
    /// Write the witness (or countermodel) as a model file.
    #[arg(long)]
    witness: Option<PathBuf>,
    #[arg(long)]
    emit_dot: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SIGMA_CAP)]
    cap_closure: usize,
    #[arg(long, default_value_t = DEFAULT_TYPE_CAP)]
    cap_types: usize,
    /// Print closure and type counts.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct Muddy {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Row queried in this round, from 1.
    #[arg(long, default_value_t = 1)]
    round: usize,
    /// Rounds held so far per row; all zero when omitted.
    #[arg(long, value_delimiter = ',')]
    counters: Vec<usize>,
    #[arg(long, group = "mode")]
    emit_formulas: bool,
    #[arg(long, group = "mode")]
    emit_model: bool,
    /// Check the round inference; the default mode.
    #[arg(long, group = "mode")]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Syntax {
    World,
    Agent,
    Gel,
    Mu,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Gel2ciel,
    Ciel2gel,
    Ciel2mu,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Formula,
    Gel,
    Model,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Theory(#[from] AgentError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Mu(#[from] MuError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl CliError {
    fn status(&self) -> u8 {
        match self {
            CliError::Decide(e) if e.is_resource_limit() => 3,
            CliError::Theory(AgentError::TooManyAtoms { .. }) => 3,
            CliError::Scenario(ScenarioError::Cap(_)) => 3,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

/// Inline text, or the contents of a file for `@path`.
fn source(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => read(Path::new(path)),
        None => Ok(arg.to_string()),
    }
}

fn world(arg: &str) -> Result<WorldFormula, CliError> {
    Ok(WorldFormula::parse(source(arg)?.trim())?)
}

fn theory(path: Option<&Path>) -> Result<AgentTheory, CliError> {
    match path {
        Some(p) => Ok(AgentTheory::parse(&read(p)?)?),
        None => Ok(AgentTheory::empty()),
    }
}

fn load_model(path: &Path, strict: bool) -> Result<CielModel, CliError> {
    let file = ModelFile::from_json(&read(path)?)?;
    let mode = if strict { ValidationMode::Strict } else { ValidationMode::Normalize };
    Ok(validate(&file, mode)?)
}

/// `Ok(true)` is a positive answer, `Ok(false)` a negative one.
fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Parse { formula, syntax, ast } => {
            let text = source(&formula)?;
            let text = text.trim();
            let out = match syntax {
                Syntax::World => show(WorldFormula::parse(text)?, ast),
                Syntax::Agent => show(AgentFormula::parse(text)?, ast),
                Syntax::Gel => show(GelFormula::parse(text)?, ast),
                Syntax::Mu => show(MuFormula::parse(text)?, ast),
            };
            println!("{out}");
            Ok(true)
        }
        Command::Check { formula, model, world: w, strict, emit_dot } => {
            let m = load_model(&model, strict)?;
            let phi = world(&formula)?;
            if let Some(path) = emit_dot {
                write(&path, &m.to_dot())?;
            }
            let x = m
                .world_index(&w)
                .ok_or_else(|| CliError::Model(ModelError::UnknownWorld(w.clone())))?;
            let holds = m.check(x, &phi)?;
            println!("{holds}");
            Ok(holds)
        }
        Command::Sat(d) => decide(d, false),
        Command::Valid(d) => decide(d, true),
        Command::Translate { direction, formula, model } => {
            let text = source(&formula)?;
            let text = text.trim();
            match direction {
                Direction::Gel2ciel => println!("{}", gel_to_ciel(&GelFormula::parse(text)?)),
                Direction::Ciel2mu => println!("{}", translate_t(&WorldFormula::parse(text)?)?),
                Direction::Ciel2gel => {
                    let path = model.ok_or_else(|| CliError::Usage("ciel2gel needs --model".into()))?;
                    let m = load_model(&path, false)?;
                    println!("{}", ciel_to_gel(&WorldFormula::parse(text)?, m.agent_model())?);
                }
            }
            Ok(true)
        }
        Command::Prove { check, ind, phi, theory: t } => {
            let t = theory(t.as_deref())?;
            if let Some(n) = ind {
                let psis: Vec<AgentFormula> = (1..=n).map(|i| AgentFormula::atom(format!("s{i}"))).collect();
                print!("{}", gen_ind_n(&psis, &world(&phi)?));
                return Ok(true);
            }
            let path = check.expect("clap requires --check without --ind");
            let d = Derivation::parse(&read(&path)?).map_err(|e| proof_usage(&path, e))?;
            match check_derivation(&d, &t) {
                Ok(()) => {
                    let last = d.conclusion().map(ToString::to_string).unwrap_or_default();
                    println!("accepted: {} lines; proves {last}", d.lines.len());
                    Ok(true)
                }
                Err(e) => {
                    println!("rejected: {e}");
                    Ok(false)
                }
            }
        }
        Command::Muddy(args) => muddy(args),
        Command::Gen { seed, count, kind, depth } => {
            let mut rng = gen::rng(seed);
            let shape = gen::Shape { depth, ..Default::default() };
            let names = vec!["a".to_string(), "b".to_string()];
            for _ in 0..count {
                match kind {
                    GenKind::Formula => println!("{}", gen::world_formula(&mut rng, &shape)),
                    GenKind::Gel => println!("{}", gen::gel_formula(&mut rng, &names, &shape.world_atoms, depth)),
                    GenKind::Model => {
                        let m = gen::ciel_model(&mut rng, &shape, 8, 4);
                        println!("{}", serde_json::to_string(&m.to_file(PairStyle::Full)).expect("serializable"));
                    }
                }
            }
            Ok(true)
        }
    }
}

fn show<F: std::fmt::Display + std::fmt::Debug>(f: F, ast: bool) -> String {
    if ast {
        format!("{f:#?}")
    } else {
        f.to_string()
    }
}

fn proof_usage(path: &Path, e: ProofError) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

fn decide(d: Decide, validity: bool) -> Result<bool, CliError> {
    if d.cap_closure == 0 || d.cap_types == 0 {
        return Err(CliError::Usage("caps must be positive".into()));
    }
    let phi = world(&d.formula)?;
    let t = theory(d.theory.as_deref())?;
    let caps = Caps { closure: d.cap_closure, types: d.cap_types };
    let query = if validity { phi.neg() } else { phi };
    let result = sat(&query, &t, caps)?;
    let positive = result.is_sat() != validity;
    let verdict = match (validity, positive) {
        (false, true) => "SAT",
        (false, false) => "UNSAT",
        (true, true) => "VALID",
        (true, false) => "INVALID",
    };
    match &result {
        SatResult::Sat { witness, start, .. } => {
            let w = &witness.worlds()[*start];
            let role = if validity { "countermodel" } else { "witness" };
            println!("{verdict} ({role} world {w} of {})", witness.len());
            if let Some(path) = &d.witness {
                write(path, &witness.to_file(PairStyle::Full).to_json())?;
            }
            if let Some(path) = &d.emit_dot {
                write(path, &witness.to_dot())?;
            }
        }
        SatResult::Unsat { .. } => println!("{verdict}"),
    }
    if d.stats {
        let s = result.stats();
        println!(
            "closure {} agents {} types {} survivors {} rounds {}",
            s.sigma, s.agents, s.types, s.survivors, s.rounds
        );
    }
    Ok(positive)
}

fn muddy(args: Muddy) -> Result<bool, CliError> {
    let counters = if args.counters.is_empty() { vec![0; args.n] } else { args.counters };
    let spec = PuzzleSpec::new(args.n, args.k, counters)?;
    if args.emit_formulas {
        println!("visibility: {}", scenarios::visibility_axiom(&spec));
        println!("initial: {}", scenarios::initial_knowledge(&spec));
        println!("uncertainty: {}", scenarios::uncertainty_announcement(&spec));
        println!("invariant: {}", scenarios::invariant_formula(&spec));
        for p in scenarios::round_premises(&spec, args.round)? {
            println!("premise: {p}");
        }
        println!("conclusion: {}", scenarios::round_conclusion(&spec, args.round)?);
        return Ok(true);
    }
    if args.emit_model {
        let m = scenarios::build_puzzle_model(&spec)?;
        println!("{}", m.to_file(PairStyle::Full).to_json());
        return Ok(true);
    }
    let holds = scenarios::check_round_inference(&spec, args.round)?;
    println!("round on row {}: {}", args.round, if holds { "holds" } else { "fails" });
    Ok(holds)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}

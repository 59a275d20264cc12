//! Hilbert-style derivations for common knowledge over agent formulas:
//! checking, a text format, and generated derivations of the n-ary
//! induction principle.
//!
//! Axioms: T `C[s] f -> f`, Bot `f -> C[false] f`,
//! K `C[s] (f -> g) -> (C[s] f -> C[s] g)`, 4 `C[s] f -> C[s] C[s] f`,
//! 5 `~C[s] f -> C[s] ~C[s] f`,
//! Ind `C[s | t] (f -> C[s] f & C[t] f) -> (f -> C[s | t] f)`.
//! Rules: MP, Nec `f / C[s] f`, AM `g -> s / C[s] f -> C[g] f`, the premise
//! of AM being discharged by entailment in the agent logic. Taut admits
//! any instance of a propositional tautology.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::agentlogic::{entails, AgentTheory};
use crate::decide::{sat, Caps, DecideError};
use crate::formula::{AgentFormula, Boolean, ParseError, WorldFormula};

/// Most distinct letters a tautology check enumerates.
pub const MAX_TAUT_LETTERS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Taut,
    /// Optional bindings `(s, f)`.
    AxT(Option<(AgentFormula, WorldFormula)>),
    AxBot(Option<WorldFormula>),
    /// Optional bindings `(s, f, g)`.
    AxK(Option<(AgentFormula, WorldFormula, WorldFormula)>),
    Ax4(Option<(AgentFormula, WorldFormula)>),
    Ax5(Option<(AgentFormula, WorldFormula)>),
    /// Optional bindings `(s, t, f)`.
    AxInd(Option<(AgentFormula, AgentFormula, WorldFormula)>),
    /// Line numbers of `A` and of `A -> B`.
    MP(usize, usize),
    Nec(usize, Option<AgentFormula>),
    /// With a line holding `C[psi] f`, concludes `C[gamma] f`; without,
    /// concludes the implication `C[psi] f -> C[gamma] f`.
    AM {
        line: Option<usize>,
        gamma: AgentFormula,
        psi: AgentFormula,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub formula: WorldFormula,
    pub justification: Justification,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Derivation {
    pub lines: Vec<Line>,
    /// Constraints the AM side conditions are checked against.
    pub theory: Vec<AgentFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("formula: {0}")]
    Formula(ParseError),
    #[error("line numbers must run 1, 2, ...; expected {0}")]
    Numbering(usize),
    #[error("reference to line {0}, which does not precede this line")]
    BadReference(usize),
    #[error("not an instance of {0}")]
    SchemaMismatch(&'static str),
    #[error("side condition fails: `{gamma}` does not entail `{psi}`")]
    SideCondition { gamma: AgentFormula, psi: AgentFormula },
    #[error("not a propositional tautology")]
    NotTautology,
    #[error("{0} propositional letters exceed the limit of {MAX_TAUT_LETTERS}")]
    TooManyLetters(usize),
    #[error("agent theory is unsatisfiable")]
    Theory,
}

/// A rejected line, numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ProofError {
    pub line: usize,
    pub kind: ProofErrorKind,
}

fn implication(f: &WorldFormula) -> Option<(&WorldFormula, &WorldFormula)> {
    match f {
        WorldFormula::Not(inner) => match &**inner {
            WorldFormula::And(a, nb) => match &**nb {
                WorldFormula::Not(b) => Some((a, b)),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn common(f: &WorldFormula) -> Option<(&AgentFormula, &WorldFormula)> {
    match f {
        WorldFormula::C(psi, body) => Some((psi, body)),
        _ => None,
    }
}

fn c(psi: &AgentFormula, f: WorldFormula) -> WorldFormula {
    WorldFormula::common(psi.clone(), f)
}

pub fn instance_t(psi: &AgentFormula, phi: &WorldFormula) -> WorldFormula {
    c(psi, phi.clone()).implies(phi.clone())
}

pub fn instance_bot(phi: &WorldFormula) -> WorldFormula {
    phi.clone().implies(c(&AgentFormula::Falsum, phi.clone()))
}

pub fn instance_k(psi: &AgentFormula, phi: &WorldFormula, gamma: &WorldFormula) -> WorldFormula {
    c(psi, phi.clone().implies(gamma.clone())).implies(c(psi, phi.clone()).implies(c(psi, gamma.clone())))
}

pub fn instance_4(psi: &AgentFormula, phi: &WorldFormula) -> WorldFormula {
    c(psi, phi.clone()).implies(c(psi, c(psi, phi.clone())))
}

pub fn instance_5(psi: &AgentFormula, phi: &WorldFormula) -> WorldFormula {
    let box_phi = c(psi, phi.clone());
    box_phi.clone().neg().implies(c(psi, box_phi.neg()))
}

pub fn instance_ind(psi: &AgentFormula, chi: &AgentFormula, phi: &WorldFormula) -> WorldFormula {
    let both = psi.clone().or(chi.clone());
    let step = phi.clone().implies(c(psi, phi.clone()).and(c(chi, phi.clone())));
    c(&both, step).implies(phi.clone().implies(c(&both, phi.clone())))
}

fn shape_t(f: &WorldFormula) -> bool {
    let Some((lhs, rhs)) = implication(f) else { return false };
    common(lhs).is_some_and(|(_, body)| body == rhs)
}

fn shape_bot(f: &WorldFormula) -> bool {
    let Some((lhs, rhs)) = implication(f) else { return false };
    common(rhs).is_some_and(|(psi, body)| *psi == AgentFormula::Falsum && body == lhs)
}

fn shape_k(f: &WorldFormula) -> bool {
    let Some((lhs, rhs)) = implication(f) else { return false };
    let Some((psi, inner)) = common(lhs) else { return false };
    let Some((phi, gamma)) = implication(inner) else { return false };
    *f == instance_k(psi, phi, gamma) && implication(rhs).is_some()
}

fn shape_4(f: &WorldFormula) -> bool {
    let Some((lhs, _)) = implication(f) else { return false };
    common(lhs).is_some_and(|(psi, phi)| *f == instance_4(psi, phi))
}

fn shape_5(f: &WorldFormula) -> bool {
    let Some((lhs, _)) = implication(f) else { return false };
    let WorldFormula::Not(inner) = lhs else { return false };
    common(inner).is_some_and(|(psi, phi)| *f == instance_5(psi, phi))
}

fn shape_ind(f: &WorldFormula) -> bool {
    let Some((lhs, _)) = implication(f) else { return false };
    let Some((_, step)) = common(lhs) else { return false };
    let Some((phi, conj)) = implication(step) else { return false };
    let WorldFormula::And(a, b) = conj else { return false };
    let (Some((psi, _)), Some((chi, _))) = (common(a), common(b)) else { return false };
    *f == instance_ind(psi, chi, phi)
}

/// Is `f` true under every valuation of its maximal non-Boolean parts?
pub fn is_tautology(f: &WorldFormula) -> Result<bool, ProofErrorKind> {
    let mut letters: HashMap<&WorldFormula, usize> = HashMap::new();
    collect_letters(f, &mut letters);
    let n = letters.len();
    if n > MAX_TAUT_LETTERS {
        return Err(ProofErrorKind::TooManyLetters(n));
    }
    Ok((0u32..(1u32 << n)).all(|mask| eval_skeleton(f, &letters, mask)))
}

fn collect_letters<'a>(f: &'a WorldFormula, letters: &mut HashMap<&'a WorldFormula, usize>) {
    match f {
        WorldFormula::Falsum => {}
        WorldFormula::Not(g) => collect_letters(g, letters),
        WorldFormula::And(a, b) => {
            collect_letters(a, letters);
            collect_letters(b, letters);
        }
        WorldFormula::Atom(_) | WorldFormula::C(..) => {
            let next = letters.len();
            letters.entry(f).or_insert(next);
        }
    }
}

fn eval_skeleton(f: &WorldFormula, letters: &HashMap<&WorldFormula, usize>, mask: u32) -> bool {
    match f {
        WorldFormula::Falsum => false,
        WorldFormula::Not(g) => !eval_skeleton(g, letters, mask),
        WorldFormula::And(a, b) => eval_skeleton(a, letters, mask) && eval_skeleton(b, letters, mask),
        _ => mask >> letters[f] & 1 == 1,
    }
}

impl Derivation {
    pub fn conclusion(&self) -> Option<&WorldFormula> {
        self.lines.last().map(|l| &l.formula)
    }

    /// Parse the line-oriented text form:
    ///
    /// ```text
    /// # comment
    /// theory: a -> b
    /// 1. C[a] p -> p ; T {a} {p}
    /// 2. p -> C[false] p ; Bot
    /// ```
    ///
    /// Rules are `Taut`, `T`, `Bot`, `K`, `4`, `5`, `Ind` (each optionally
    /// followed by all its bindings in braces), `MP i j`, `Nec i [{s}]`,
    /// `AM [i] {gamma} {psi}`.
    pub fn parse(text: &str) -> Result<Self, ProofError> {
        let mut d = Derivation::default();
        for (ln, raw) in text.lines().enumerate() {
            let err = |kind| ProofError { line: ln + 1, kind };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("theory:") {
                let f = AgentFormula::parse(rest.trim()).map_err(|e| err(ProofErrorKind::Formula(e)))?;
                d.theory.push(f);
                continue;
            }
            let (number, rest) = line
                .split_once('.')
                .ok_or_else(|| err(ProofErrorKind::Syntax("expected `<n>. <formula> ; <rule>`".into())))?;
            let expected = d.lines.len() + 1;
            if number.trim().parse::<usize>().ok() != Some(expected) {
                return Err(err(ProofErrorKind::Numbering(expected)));
            }
            let (formula, rule) = rest
                .split_once(';')
                .ok_or_else(|| err(ProofErrorKind::Syntax("missing `;` before the rule".into())))?;
            let formula = WorldFormula::parse(formula.trim()).map_err(|e| err(ProofErrorKind::Formula(e)))?;
            let justification = parse_rule(rule.trim()).map_err(err)?;
            d.lines.push(Line { formula, justification });
        }
        Ok(d)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

enum Arg {
    Line(usize),
    Formula(String),
}

fn split_args(text: &str) -> Result<Vec<Arg>, ProofErrorKind> {
    let mut out = Vec::new();
    let mut rest = text.trim_start();
    while !rest.is_empty() {
        if let Some(body) = rest.strip_prefix('{') {
            let end = body
                .find('}')
                .ok_or_else(|| ProofErrorKind::Syntax("unclosed `{`".into()))?;
            out.push(Arg::Formula(body[..end].trim().to_string()));
            rest = body[end + 1..].trim_start();
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let n = rest[..end]
                .parse::<usize>()
                .map_err(|_| ProofErrorKind::Syntax(format!("bad argument `{}`", &rest[..end])))?;
            out.push(Arg::Line(n));
            rest = rest[end..].trim_start();
        }
    }
    Ok(out)
}

fn parse_rule(text: &str) -> Result<Justification, ProofErrorKind> {
    let (name, args) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    let args = split_args(args)?;
    let agent = |s: &str| AgentFormula::parse(s).map_err(ProofErrorKind::Formula);
    let world = |s: &str| WorldFormula::parse(s).map_err(ProofErrorKind::Formula);
    let formulas: Vec<&str> = args
        .iter()
        .filter_map(|a| match a {
            Arg::Formula(s) => Some(s.as_str()),
            Arg::Line(_) => None,
        })
        .collect();
    let lines: Vec<usize> = args
        .iter()
        .filter_map(|a| match a {
            Arg::Line(n) => Some(*n),
            Arg::Formula(_) => None,
        })
        .collect();
    let arity = |lines_n: &[usize], formulas_n: &[usize]| -> Result<(), ProofErrorKind> {
        if lines_n.contains(&lines.len()) && formulas_n.contains(&formulas.len()) {
            Ok(())
        } else {
            Err(ProofErrorKind::Syntax(format!("wrong number of arguments for {name}")))
        }
    };
    let key = name.to_ascii_lowercase();
    let key = key.strip_prefix("ax").filter(|k| !k.is_empty()).unwrap_or(&key);
    Ok(match key {
        "taut" => {
            arity(&[0], &[0])?;
            Justification::Taut
        }
        "t" | "4" | "5" => {
            arity(&[0], &[0, 2])?;
            let b = match formulas.as_slice() {
                [s, f] => Some((agent(s)?, world(f)?)),
                _ => None,
            };
            match key {
                "t" => Justification::AxT(b),
                "4" => Justification::Ax4(b),
                _ => Justification::Ax5(b),
            }
        }
        "bot" => {
            arity(&[0], &[0, 1])?;
            Justification::AxBot(formulas.first().map(|f| world(f)).transpose()?)
        }
        "k" => {
            arity(&[0], &[0, 3])?;
            Justification::AxK(match formulas.as_slice() {
                [s, f, g] => Some((agent(s)?, world(f)?, world(g)?)),
                _ => None,
            })
        }
        "ind" => {
            arity(&[0], &[0, 3])?;
            Justification::AxInd(match formulas.as_slice() {
                [s, t, f] => Some((agent(s)?, agent(t)?, world(f)?)),
                _ => None,
            })
        }
        "mp" => {
            arity(&[2], &[0])?;
            Justification::MP(lines[0], lines[1])
        }
        "nec" => {
            arity(&[1], &[0, 1])?;
            Justification::Nec(lines[0], formulas.first().map(|s| agent(s)).transpose()?)
        }
        "am" => {
            arity(&[0, 1], &[2])?;
            Justification::AM {
                line: lines.first().copied(),
                gamma: agent(formulas[0])?,
                psi: agent(formulas[1])?,
            }
        }
        _ => return Err(ProofErrorKind::Syntax(format!("unknown rule `{name}`"))),
    })
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Justification::*;
        match self {
            Taut => write!(f, "Taut"),
            AxT(b) | Ax4(b) | Ax5(b) => {
                let name = match self {
                    AxT(_) => "T",
                    Ax4(_) => "4",
                    _ => "5",
                };
                write!(f, "{name}")?;
                if let Some((s, g)) = b {
                    write!(f, " {{{s}}} {{{g}}}")?;
                }
                Ok(())
            }
            AxBot(b) => {
                write!(f, "Bot")?;
                if let Some(g) = b {
                    write!(f, " {{{g}}}")?;
                }
                Ok(())
            }
            AxK(b) => {
                write!(f, "K")?;
                if let Some((s, g, h)) = b {
                    write!(f, " {{{s}}} {{{g}}} {{{h}}}")?;
                }
                Ok(())
            }
            AxInd(b) => {
                write!(f, "Ind")?;
                if let Some((s, t, g)) = b {
                    write!(f, " {{{s}}} {{{t}}} {{{g}}}")?;
                }
                Ok(())
            }
            MP(i, j) => write!(f, "MP {i} {j}"),
            Nec(i, s) => {
                write!(f, "Nec {i}")?;
                if let Some(s) = s {
                    write!(f, " {{{s}}}")?;
                }
                Ok(())
            }
            AM { line, gamma, psi } => {
                write!(f, "AM")?;
                if let Some(i) = line {
                    write!(f, " {i}")?;
                }
                write!(f, " {{{gamma}}} {{{psi}}}")
            }
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.theory {
            writeln!(f, "theory: {t}")?;
        }
        for (i, l) in self.lines.iter().enumerate() {
            writeln!(f, "{}. {} ; {}", i + 1, l.formula, l.justification)?;
        }
        Ok(())
    }
}

/// Check every line; reports the first failing one. AM side conditions are
/// checked against the derivation's own theory together with `theory`.
pub fn check_derivation(d: &Derivation, theory: &AgentTheory) -> Result<(), ProofError> {
    let mut constraints = theory.constraints().to_vec();
    constraints.extend(d.theory.iter().cloned());
    let theory = AgentTheory::new(constraints).map_err(|_| ProofError {
        line: 0,
        kind: ProofErrorKind::Theory,
    })?;
    for (i, line) in d.lines.iter().enumerate() {
        check_line(d, i, line, &theory).map_err(|kind| ProofError { line: i + 1, kind })?;
    }
    Ok(())
}

fn check_line(d: &Derivation, i: usize, line: &Line, theory: &AgentTheory) -> Result<(), ProofErrorKind> {
    use Justification::*;
    let f = &line.formula;
    let earlier = |n: usize| -> Result<&WorldFormula, ProofErrorKind> {
        if n >= 1 && n <= i {
            Ok(&d.lines[n - 1].formula)
        } else {
            Err(ProofErrorKind::BadReference(n))
        }
    };
    let schema = |ok: bool, name| if ok { Ok(()) } else { Err(ProofErrorKind::SchemaMismatch(name)) };
    match &line.justification {
        Taut => {
            if is_tautology(f)? {
                Ok(())
            } else {
                Err(ProofErrorKind::NotTautology)
            }
        }
        AxT(b) => schema(b.as_ref().map_or_else(|| shape_t(f), |(s, g)| *f == instance_t(s, g)), "T"),
        AxBot(b) => schema(b.as_ref().map_or_else(|| shape_bot(f), |g| *f == instance_bot(g)), "Bot"),
        AxK(b) => schema(b.as_ref().map_or_else(|| shape_k(f), |(s, g, h)| *f == instance_k(s, g, h)), "K"),
        Ax4(b) => schema(b.as_ref().map_or_else(|| shape_4(f), |(s, g)| *f == instance_4(s, g)), "4"),
        Ax5(b) => schema(b.as_ref().map_or_else(|| shape_5(f), |(s, g)| *f == instance_5(s, g)), "5"),
        AxInd(b) => schema(
            b.as_ref().map_or_else(|| shape_ind(f), |(s, t, g)| *f == instance_ind(s, t, g)),
            "Ind",
        ),
        MP(a, b) => {
            let premise = earlier(*a)?;
            let imp = earlier(*b)?;
            schema(implication(imp) == Some((premise, f)), "modus ponens")
        }
        Nec(a, psi) => {
            let premise = earlier(*a)?;
            let ok = common(f).is_some_and(|(s, body)| body == premise && psi.as_ref().is_none_or(|p| p == s));
            schema(ok, "necessitation")
        }
        AM { line, gamma, psi } => {
            let ok = match line {
                Some(a) => {
                    let premise = earlier(*a)?;
                    match (common(premise), common(f)) {
                        (Some((p, body)), Some((g, body2))) => p == psi && g == gamma && body == body2,
                        _ => false,
                    }
                }
                None => match implication(f) {
                    Some((lhs, rhs)) => match (common(lhs), common(rhs)) {
                        (Some((p, body)), Some((g, body2))) => p == psi && g == gamma && body == body2,
                        _ => false,
                    },
                    None => false,
                },
            };
            schema(ok, "antimonotonicity")?;
            if entails(gamma, psi, theory) {
                Ok(())
            } else {
                Err(ProofErrorKind::SideCondition {
                    gamma: gamma.clone(),
                    psi: psi.clone(),
                })
            }
        }
    }
}

/// Derivation under construction; line numbers start at 1.
#[derive(Debug, Default)]
struct Builder {
    lines: Vec<Line>,
}

impl Builder {
    fn push(&mut self, formula: WorldFormula, justification: Justification) -> usize {
        self.lines.push(Line { formula, justification });
        self.lines.len()
    }

    fn formula(&self, n: usize) -> &WorldFormula {
        &self.lines[n - 1].formula
    }

    /// Modus ponens from lines `a` (`A`) and `b` (`A -> B`).
    fn mp(&mut self, a: usize, b: usize) -> usize {
        let (_, rhs) = implication(self.formula(b)).expect("implication");
        let rhs = rhs.clone();
        self.push(rhs, Justification::MP(a, b))
    }

    /// Append a whole derivation, shifting its references.
    fn append(&mut self, d: Derivation) -> usize {
        let off = self.lines.len();
        for l in d.lines {
            use Justification::*;
            let j = match l.justification {
                MP(a, b) => MP(a + off, b + off),
                Nec(a, s) => Nec(a + off, s),
                AM { line, gamma, psi } => AM {
                    line: line.map(|a| a + off),
                    gamma,
                    psi,
                },
                other => other,
            };
            self.push(l.formula, j);
        }
        self.lines.len()
    }

    /// From `C[s] (A -> B)` at line `n`, derive `C[s] A -> C[s] B` by K.
    fn distribute(&mut self, n: usize) -> usize {
        let (psi, inner) = common(self.formula(n)).expect("common knowledge");
        let (a, b) = implication(inner).expect("implication");
        let (psi, a, b) = (psi.clone(), a.clone(), b.clone());
        let k = self.push(instance_k(&psi, &a, &b), Justification::AxK(Some((psi, a, b))));
        self.mp(n, k)
    }

    /// From `A -> B` at line `n`, derive `C[s] A -> C[s] B`.
    fn lift(&mut self, n: usize, psi: &AgentFormula) -> usize {
        let nec = self.push(c(psi, self.formula(n).clone()), Justification::Nec(n, Some(psi.clone())));
        self.distribute(nec)
    }

    /// From `A -> B` at `ab` and `B -> C` at `bc`, derive `A -> C`.
    fn chain(&mut self, ab: usize, bc: usize) -> usize {
        let (a, b) = implication(self.formula(ab)).expect("implication");
        let (_, cc) = implication(self.formula(bc)).expect("implication");
        let (a, b, cc) = (a.clone(), b.clone(), cc.clone());
        let taut = a.clone().implies(b.clone()).implies(b.implies(cc.clone()).implies(a.implies(cc)));
        let t = self.push(taut, Justification::Taut);
        let m = self.mp(ab, t);
        self.mp(bc, m)
    }

    fn finish(self) -> Derivation {
        Derivation {
            lines: self.lines,
            theory: Vec::new(),
        }
    }
}

/// The statement derived by [`gen_ind_n`]:
/// `C[s1 | ... | sn] (f -> C[s1] f & ... & C[sn] f) -> (f -> C[s1 | ... | sn] f)`,
/// with both folds to the left, the empty disjunction `false` and the empty
/// conjunction `true`.
pub fn ind_n_statement(psis: &[AgentFormula], phi: &WorldFormula) -> WorldFormula {
    let any = AgentFormula::disjunction(psis.iter().cloned());
    let all = WorldFormula::conjunction(psis.iter().map(|p| c(p, phi.clone())));
    c(&any, phi.clone().implies(all)).implies(phi.clone().implies(c(&any, phi.clone())))
}

/// Derivation of [`ind_n_statement`] by induction on the number of indices.
pub fn gen_ind_n(psis: &[AgentFormula], phi: &WorldFormula) -> Derivation {
    let target = ind_n_statement(psis, phi);
    let mut b = Builder::default();
    match psis {
        [] => {
            let bot = b.push(instance_bot(phi), Justification::AxBot(Some(phi.clone())));
            let (premise, _) = implication(&target).expect("implication");
            let weaken = b.formula(bot).clone().implies(premise.clone().implies(b.formula(bot).clone()));
            let t = b.push(weaken, Justification::Taut);
            b.mp(bot, t);
        }
        [psi] => {
            let step = phi.clone().implies(c(psi, phi.clone()));
            b.push(instance_t(psi, &step), Justification::AxT(Some((psi.clone(), step))));
        }
        [psi, chi] => {
            b.push(instance_ind(psi, chi, phi), Justification::AxInd(Some((psi.clone(), chi.clone(), phi.clone()))));
        }
        [init @ .., last] => {
            let d = AgentFormula::disjunction(psis.iter().cloned());
            let e = AgentFormula::disjunction(init.iter().cloned());
            let k_n = WorldFormula::conjunction(init.iter().map(|p| c(p, phi.clone())));
            let last_box = c(last, phi.clone());
            let x = k_n.clone().and(last_box.clone());
            let phi_x = phi.clone().implies(x.clone());
            let z = c(&d, phi_x.clone());
            let p = c(&e, phi_x.clone());
            let q = c(&e, phi.clone());
            let w = phi.clone().implies(q.clone().and(last_box.clone()));

            // Z -> C[d] Z
            let four = b.push(instance_4(&d, &phi_x), Justification::Ax4(Some((d.clone(), phi_x.clone()))));
            // C[d] Z -> C[d] P, lifting Z -> P obtained by AM
            let am = b.push(
                z.clone().implies(p.clone()),
                Justification::AM {
                    line: None,
                    gamma: e.clone(),
                    psi: d.clone(),
                },
            );
            let lifted_am = b.lift(am, &d);
            // P -> C[e] (f -> K_n)
            let weaken = b.push(phi_x.clone().implies(phi.clone().implies(k_n.clone())), Justification::Taut);
            let p_to_kn = b.lift(weaken, &e);
            // P -> (f -> Q) through the induction hypothesis
            let ih = b.append(gen_ind_n(init, phi));
            let p_to_q = b.chain(p_to_kn, ih);
            // (f -> X) -> (P -> W), lifted under C[d]
            let combine = b.formula(p_to_q).clone().implies(phi_x.clone().implies(p.clone().implies(w.clone())));
            let combine = b.push(combine, Justification::Taut);
            let combined = b.mp(p_to_q, combine);
            let z_to_pw = b.lift(combined, &d);
            let pw = c(&d, p.clone().implies(w.clone()));
            let k_pw = b.push(
                instance_k(&d, &p, &w),
                Justification::AxK(Some((d.clone(), p.clone(), w.clone()))),
            );
            // Z -> C[d] W from the four implications above
            let cz = c(&d, z.clone());
            let cp = c(&d, p.clone());
            let cw = c(&d, w.clone());
            let glue = z
                .clone()
                .implies(cz.clone())
                .implies(cz.implies(cp.clone()).implies(
                    z.clone()
                        .implies(pw.clone())
                        .implies(pw.implies(cp.implies(cw.clone())).implies(z.clone().implies(cw.clone()))),
                ));
            let glue = b.push(glue, Justification::Taut);
            let g1 = b.mp(four, glue);
            let g2 = b.mp(lifted_am, g1);
            let g3 = b.mp(z_to_pw, g2);
            let z_to_cw = b.mp(k_pw, g3);
            let ind = b.push(
                instance_ind(&e, last, phi),
                Justification::AxInd(Some((e.clone(), last.clone(), phi.clone()))),
            );
            b.chain(z_to_cw, ind);
        }
    }
    let d = b.finish();
    debug_assert_eq!(d.conclusion(), Some(&target));
    d
}

/// Whether the conjunction of `gamma` is satisfiable, which by soundness and
/// completeness coincides with consistency.
pub fn consistent(gamma: &[WorldFormula], theory: &AgentTheory, caps: Caps) -> Result<bool, DecideError> {
    let conj = WorldFormula::conjunction(gamma.iter().cloned());
    Ok(sat(&conj, theory, caps)?.is_sat())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> WorldFormula {
        WorldFormula::parse(s).unwrap()
    }
    fn a(s: &str) -> AgentFormula {
        AgentFormula::parse(s).unwrap()
    }

    fn check(text: &str) -> Result<(), ProofError> {
        check_derivation(&Derivation::parse(text).unwrap(), &AgentTheory::empty())
    }

    #[test]
    fn axiom_lines() {
        check("1. C[a] p -> p ; T\n2. p -> C[false] p ; Bot").unwrap();
        check("1. C[a] p -> p ; T {a} {p}").unwrap();
        assert_eq!(
            check("1. C[a] p -> p ; T {b} {p}").unwrap_err().kind,
            ProofErrorKind::SchemaMismatch("T")
        );
        assert!(check("1. p -> C[x & ~x] p ; Bot").is_err());
        check("1. C[a] (p -> q) -> (C[a] p -> C[a] q) ; K").unwrap();
        check("1. C[a] p -> C[a] C[a] p ; 4").unwrap();
        check("1. ~C[a] p -> C[a] ~C[a] p ; 5").unwrap();
        check("1. C[a | b] (p -> C[a] p & C[b] p) -> (p -> C[a | b] p) ; Ind").unwrap();
        assert!(check("1. C[a | b] (p -> C[b] p & C[a] p) -> (p -> C[a | b] p) ; Ind").is_err());
    }

    #[test]
    fn modus_ponens_shape() {
        check("1. p -> p ; Taut\n2. (p -> p) -> (q -> q) ; Taut\n3. q -> q ; MP 1 2").unwrap();
        let err = check("1. p -> p ; Taut\n2. q -> q ; Taut\n3. q ; MP 1 2").unwrap_err();
        assert_eq!(err.line, 3);
        let err = check("1. p -> p ; Taut\n2. p -> p ; MP 1 3").unwrap_err();
        assert_eq!(err.kind, ProofErrorKind::BadReference(3));
    }

    #[test]
    fn antimonotonicity() {
        check("1. C[q | r] p -> C[q] p ; AM {q} {q | r}").unwrap();
        check("1. p -> p ; Taut\n2. C[q | r] (p -> p) ; Nec 1 {q | r}\n3. C[q] (p -> p) ; AM 2 {q} {q | r}").unwrap();
        let err = check("1. C[q] p -> C[q | r] p ; AM {q | r} {q}").unwrap_err();
        assert!(matches!(err.kind, ProofErrorKind::SideCondition { .. }));
        check("theory: x -> y\n1. C[y] p -> C[x] p ; AM {x} {y}").unwrap();
    }

    #[test]
    fn tautologies() {
        assert!(is_tautology(&w("C[a] p | ~C[a] p")).unwrap());
        assert!(!is_tautology(&w("C[a] p -> p")).unwrap());
        assert!(is_tautology(&w("true")).unwrap());
        assert_eq!(check("1. p ; Taut").unwrap_err().kind, ProofErrorKind::NotTautology);
    }

    #[test]
    fn text_roundtrip() {
        let d = gen_ind_n(&[a("x"), a("y"), a("z")], &w("p"));
        let back = Derivation::parse(&d.to_text()).unwrap();
        assert_eq!(back, d);
        assert!(Derivation::parse("2. p ; Taut").is_err());
        assert!(Derivation::parse("1. p ; Frob").is_err());
        assert!(Derivation::parse("1. p").is_err());
    }

    #[test]
    fn generated_induction() {
        let psis = [a("x"), a("~y"), a("x & y"), a("z"), a("y | z")];
        for phi in [w("p"), w("p & ~C[x] q")] {
            for n in 0..=psis.len() {
                let d = gen_ind_n(&psis[..n], &phi);
                assert_eq!(d.conclusion(), Some(&ind_n_statement(&psis[..n], &phi)));
                check_derivation(&d, &AgentTheory::empty()).unwrap_or_else(|e| panic!("n={n}: {e}\n{d}"));
            }
        }
        assert_eq!(gen_ind_n(&[a("x")], &w("p")).lines.len(), 1);
        assert_eq!(gen_ind_n(&[a("x"), a("y")], &w("p")).lines.len(), 1);
    }

    #[test]
    fn consistency() {
        let caps = Caps::default();
        let t = AgentTheory::empty();
        assert!(!consistent(&[w("p"), w("~p")], &t, caps).unwrap());
        assert!(consistent(&[w("~C[A | B] p"), w("C[A] C[B] p")], &t, caps).unwrap());
        assert!(consistent(&[], &t, caps).unwrap());
    }
}

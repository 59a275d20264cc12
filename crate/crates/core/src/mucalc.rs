//! Single-variable full mu-calculus with converse programs: syntax, finite
//! model evaluation, the translation from CIEL and the model constructions
//! relating the two semantics.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::agentlogic::{Agent, AgentModel, AgentTheory};
use crate::formula::parse::{self, Grammar, Parser, Tok};
use crate::formula::print::{self, Printable, View};
use crate::formula::{AgentFormula, Boolean, ParseError, ParseErrorKind, WorldFormula};
use crate::partition::Partition;
use crate::semantics::{CielModel, Frame, WorldSet};

/// Program that links a world to the (agent, world) pairs it reaches.
pub const EDGE: &str = "edge";
/// Program from an (agent, world) pair to its agent.
pub const PI1: &str = "pi1";
/// Program from an (agent, world) pair to its world.
pub const PI2: &str = "pi2";
/// The fixpoint variable.
pub const VAR: &str = "z";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Atomic(String),
    Converse(String),
}

impl Program {
    pub fn atomic(name: &str) -> Self {
        Program::Atomic(name.to_string())
    }
    pub fn converse(name: &str) -> Self {
        Program::Converse(name.to_string())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Atomic(a) => write!(f, "{a}"),
            Program::Converse(a) => write!(f, "{a}^-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MuFormula {
    Falsum,
    Atom(String),
    Var,
    Not(Box<MuFormula>),
    And(Box<MuFormula>, Box<MuFormula>),
    Box(Program, Box<MuFormula>),
    /// Greatest fixpoint binding the variable. Build with [`MuFormula::nu`].
    Nu(Box<MuFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MuError {
    #[error("fixpoint body `{0}` has a negative occurrence of the variable")]
    NotPositive(String),
    #[error("`{0}` is reserved by the translation")]
    Reserved(String),
}

impl Boolean for MuFormula {
    fn falsum() -> Self {
        MuFormula::Falsum
    }
    fn neg(self) -> Self {
        MuFormula::Not(Box::new(self))
    }
    fn and(self, other: Self) -> Self {
        MuFormula::And(Box::new(self), Box::new(other))
    }
}

impl MuFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        MuFormula::Atom(name.into())
    }

    pub fn boxed(program: Program, body: MuFormula) -> Self {
        MuFormula::Box(program, Box::new(body))
    }

    /// `<a> body`, stored as `~[a] ~body`.
    pub fn diamond(program: Program, body: MuFormula) -> Self {
        Self::boxed(program, body.neg()).neg()
    }

    /// Rejects bodies with a free negative occurrence of the variable.
    pub fn nu(body: MuFormula) -> Result<Self, MuError> {
        if !body.var_positive(true) {
            return Err(MuError::NotPositive(body.to_string()));
        }
        Ok(MuFormula::Nu(Box::new(body)))
    }

    /// Least fixpoint, as `~nu z. ~body[~z/z]`.
    pub fn mu(body: MuFormula) -> Result<Self, MuError> {
        if !body.var_positive(true) {
            return Err(MuError::NotPositive(body.to_string()));
        }
        Ok(MuFormula::Nu(Box::new(body.substitute_negated_var().neg())).neg())
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse_all(text)
    }

    pub fn size(&self) -> usize {
        match self {
            MuFormula::Falsum | MuFormula::Atom(_) | MuFormula::Var => 1,
            MuFormula::Not(f) | MuFormula::Box(_, f) | MuFormula::Nu(f) => 1 + f.size(),
            MuFormula::And(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Whether every free occurrence of the variable has the given polarity
    /// flipped an even number of times.
    fn var_positive(&self, positive: bool) -> bool {
        match self {
            MuFormula::Var => positive,
            MuFormula::Falsum | MuFormula::Atom(_) | MuFormula::Nu(_) => true,
            MuFormula::Not(f) => f.var_positive(!positive),
            MuFormula::Box(_, f) => f.var_positive(positive),
            MuFormula::And(a, b) => a.var_positive(positive) && b.var_positive(positive),
        }
    }

    /// Every fixpoint body is positive in the variable.
    pub fn is_well_formed(&self) -> bool {
        match self {
            MuFormula::Falsum | MuFormula::Atom(_) | MuFormula::Var => true,
            MuFormula::Not(f) | MuFormula::Box(_, f) => f.is_well_formed(),
            MuFormula::And(a, b) => a.is_well_formed() && b.is_well_formed(),
            MuFormula::Nu(f) => f.var_positive(true) && f.is_well_formed(),
        }
    }

    fn substitute_negated_var(&self) -> MuFormula {
        match self {
            MuFormula::Var => MuFormula::Var.neg(),
            MuFormula::Falsum | MuFormula::Atom(_) | MuFormula::Nu(_) => self.clone(),
            MuFormula::Not(f) => f.substitute_negated_var().neg(),
            MuFormula::Box(p, f) => MuFormula::boxed(p.clone(), f.substitute_negated_var()),
            MuFormula::And(a, b) => a.substitute_negated_var().and(b.substitute_negated_var()),
        }
    }
}

impl Printable for MuFormula {
    fn view(&self) -> View<'_, Self> {
        match self {
            MuFormula::Falsum => View::Falsum,
            MuFormula::Atom(a) => View::Leaf(Cow::Borrowed(a)),
            MuFormula::Var => View::Leaf(Cow::Borrowed(VAR)),
            MuFormula::Not(f) => View::Not(f),
            MuFormula::And(a, b) => View::And(a, b),
            MuFormula::Box(p, body) => View::Prefix {
                text: format!("[{p}] "),
                dual: Some(format!("<{p}> ")),
                loose: false,
                body,
            },
            MuFormula::Nu(body) => View::Prefix {
                text: format!("nu {VAR}. "),
                dual: None,
                loose: true,
                body,
            },
        }
    }
}

fn parse_program(p: &mut Parser, close: Tok) -> Result<Program, ParseError> {
    let name = p.ident()?;
    if *p.peek() != Tok::Caret {
        p.expect(close)?;
        return Ok(Program::Atomic(name));
    }
    p.bump();
    match p.peek() {
        Tok::Minus => {
            p.bump();
            p.expect(close)?;
        }
        // `^->` closes a diamond
        Tok::Arrow if close == Tok::Gt => {
            p.bump();
        }
        _ => return Err(p.unexpected("`-`")),
    }
    Ok(Program::Converse(name))
}

impl Grammar for MuFormula {
    fn unary(p: &mut Parser) -> Result<Self, ParseError> {
        if let Some(f) = p.common_unary::<Self>()? {
            return Ok(f);
        }
        match p.peek().clone() {
            Tok::LBrack => {
                p.bump();
                let prog = parse_program(p, Tok::RBrack)?;
                Ok(MuFormula::boxed(prog, MuFormula::unary(p)?))
            }
            Tok::Lt => {
                p.bump();
                let prog = parse_program(p, Tok::Gt)?;
                Ok(MuFormula::diamond(prog, MuFormula::unary(p)?))
            }
            Tok::Ident(name) => {
                let binder = (name == "nu" || name == "mu")
                    && *p.peek_at(1) == Tok::Ident(VAR.into())
                    && *p.peek_at(2) == Tok::Dot;
                p.bump();
                if !binder {
                    return Ok(if name == VAR { MuFormula::Var } else { MuFormula::Atom(name) });
                }
                p.bump();
                p.bump();
                let body = p.expr::<MuFormula>()?;
                let built = if name == "nu" { MuFormula::nu(body) } else { MuFormula::mu(body) };
                built.map_err(|e| p.error(ParseErrorKind::Syntax, e.to_string()))
            }
            _ => Err(p.unexpected("formula")),
        }
    }
}

impl fmt::Display for MuFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(self))
    }
}

impl std::str::FromStr for MuFormula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// A finite Kripke model for the mu-calculus. Only forward relations are
/// stored; converses are read off them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuModel {
    domain: Vec<String>,
    programs: BTreeMap<String, Vec<(usize, usize)>>,
    valuation: BTreeMap<String, WorldSet>,
}

impl MuModel {
    /// Pairs and valuation entries outside the domain are dropped.
    pub fn new(
        domain: Vec<String>,
        programs: BTreeMap<String, Vec<(usize, usize)>>,
        valuation: BTreeMap<String, WorldSet>,
    ) -> Self {
        let n = domain.len();
        let programs = programs
            .into_iter()
            .map(|(k, mut v)| {
                v.retain(|&(a, b)| a < n && b < n);
                v.sort_unstable();
                v.dedup();
                (k, v)
            })
            .collect();
        let valuation = valuation
            .into_iter()
            .map(|(k, s)| {
                let mut t = FixedBitSet::with_capacity(n);
                t.extend(s.ones().filter(|&x| x < n));
                (k, t)
            })
            .collect();
        MuModel { domain, programs, valuation }
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn relation(&self, program: &str) -> &[(usize, usize)] {
        self.programs.get(program).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn valuation(&self) -> &BTreeMap<String, WorldSet> {
        &self.valuation
    }

    fn full(&self) -> WorldSet {
        let mut s = FixedBitSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }

    /// Extension of `phi` with the variable interpreted as `u`.
    pub fn eval(&self, phi: &MuFormula, u: &WorldSet) -> WorldSet {
        let n = self.len();
        match phi {
            MuFormula::Falsum => FixedBitSet::with_capacity(n),
            MuFormula::Atom(a) => self
                .valuation
                .get(a)
                .cloned()
                .unwrap_or_else(|| FixedBitSet::with_capacity(n)),
            MuFormula::Var => u.clone(),
            MuFormula::Not(f) => {
                let mut s = self.eval(f, u);
                s.toggle_range(..);
                s
            }
            MuFormula::And(a, b) => {
                let mut s = self.eval(a, u);
                s.intersect_with(&self.eval(b, u));
                s
            }
            MuFormula::Box(prog, f) => {
                let inner = self.eval(f, u);
                let mut out = self.full();
                let (name, converse) = match prog {
                    Program::Atomic(a) => (a, false),
                    Program::Converse(a) => (a, true),
                };
                for &(d, e) in self.relation(name) {
                    let (from, to) = if converse { (e, d) } else { (d, e) };
                    if !inner.contains(to) {
                        out.set(from, false);
                    }
                }
                out
            }
            MuFormula::Nu(body) => self.nu_iterates(body).pop().expect("at least one iterate"),
        }
    }

    /// Extension of a closed formula.
    pub fn eval_closed(&self, phi: &MuFormula) -> WorldSet {
        self.eval(phi, &FixedBitSet::with_capacity(self.len()))
    }

    /// The decreasing approximants of `nu z. body`, starting from the whole
    /// domain; the last one is the fixpoint.
    pub fn nu_iterates(&self, body: &MuFormula) -> Vec<WorldSet> {
        let mut iterates = vec![self.full()];
        loop {
            let next = self.eval(body, iterates.last().expect("nonempty"));
            if &next == iterates.last().expect("nonempty") {
                return iterates;
            }
            iterates.push(next);
        }
    }
}

fn embed_agent(psi: &AgentFormula) -> MuFormula {
    match psi {
        AgentFormula::Falsum => MuFormula::Falsum,
        AgentFormula::Atom(a) => MuFormula::Atom(a.clone()),
        AgentFormula::Not(f) => embed_agent(f).neg(),
        AgentFormula::And(a, b) => embed_agent(a).and(embed_agent(b)),
    }
}

fn check_reserved(names: impl IntoIterator<Item = String>) -> Result<(), MuError> {
    for n in names {
        if [VAR, EDGE, PI1, PI2, "nu", "mu"].contains(&n.as_str()) {
            return Err(MuError::Reserved(n));
        }
    }
    Ok(())
}

/// The translation `t`. Each `C[psi] phi` becomes
/// `nu z. t(phi) & [edge](<pi1> psi -> [pi2] z) & [pi2^-](<pi1> psi -> [edge^-] z)`.
pub fn translate_t(phi: &WorldFormula) -> Result<MuFormula, MuError> {
    check_reserved(phi.world_atoms())?;
    check_reserved(phi.agent_atoms())?;
    Ok(t(phi))
}

fn t(phi: &WorldFormula) -> MuFormula {
    match phi {
        WorldFormula::Falsum => MuFormula::Falsum,
        WorldFormula::Atom(a) => MuFormula::Atom(a.clone()),
        WorldFormula::Not(f) => t(f).neg(),
        WorldFormula::And(a, b) => t(a).and(t(b)),
        WorldFormula::C(psi, body) => {
            let picks = || MuFormula::diamond(Program::atomic(PI1), embed_agent(psi));
            let forward = MuFormula::boxed(
                Program::atomic(EDGE),
                picks().implies(MuFormula::boxed(Program::atomic(PI2), MuFormula::Var)),
            );
            let backward = MuFormula::boxed(
                Program::converse(PI2),
                picks().implies(MuFormula::boxed(Program::converse(EDGE), MuFormula::Var)),
            );
            MuFormula::nu(t(body).and(forward).and(backward)).expect("translation bodies are positive")
        }
    }
}

/// A CIEL model encoded as a mu-calculus model over agents, worlds and
/// (agent, world) pairs, in that order.
#[derive(Debug, Clone)]
pub struct MuEncoding {
    pub model: MuModel,
    pub agents: usize,
    pub worlds: usize,
}

impl MuEncoding {
    /// Domain element of world `x`.
    pub fn world(&self, x: usize) -> usize {
        self.agents + x
    }

    /// Domain element of the pair (agent `a`, world `x`).
    pub fn pair(&self, a: usize, x: usize) -> usize {
        self.agents + self.worlds + a * self.worlds + x
    }
}

/// `edge` links `x` to `(a, y)` whenever `x ~a y`; `pi1` and `pi2` project
/// pairs. Agent atoms hold on agents, world atoms on worlds.
pub fn ciel_model_to_mu(m: &CielModel) -> MuEncoding {
    let agents = m.agent_model().agents();
    let enc_shape = MuEncoding {
        model: MuModel::new(vec![], BTreeMap::new(), BTreeMap::new()),
        agents: agents.len(),
        worlds: m.len(),
    };
    let mut domain: Vec<String> = agents.iter().map(|a| format!("agent:{}", a.name)).collect();
    domain.extend(m.worlds().iter().map(|w| format!("world:{w}")));
    for a in agents {
        domain.extend(m.worlds().iter().map(|w| format!("pair:{}:{w}", a.name)));
    }
    let n = domain.len();

    let mut edge = Vec::new();
    let mut pi1 = Vec::new();
    let mut pi2 = Vec::new();
    for (i, p) in m.frame().indist().iter().enumerate() {
        for (x, y) in p.pairs() {
            edge.push((enc_shape.world(x), enc_shape.pair(i, y)));
        }
        for x in 0..m.len() {
            pi1.push((enc_shape.pair(i, x), i));
            pi2.push((enc_shape.pair(i, x), enc_shape.world(x)));
        }
    }
    let programs = BTreeMap::from([
        (EDGE.to_string(), edge),
        (PI1.to_string(), pi1),
        (PI2.to_string(), pi2),
    ]);

    let mut valuation: BTreeMap<String, WorldSet> = BTreeMap::new();
    for (atom, s) in m.frame().valuation() {
        let e = valuation
            .entry(atom.clone())
            .or_insert_with(|| FixedBitSet::with_capacity(n));
        e.extend(s.ones().map(|x| enc_shape.world(x)));
    }
    for (i, a) in agents.iter().enumerate() {
        for (atom, &v) in &a.valuation {
            let e = valuation
                .entry(atom.clone())
                .or_insert_with(|| FixedBitSet::with_capacity(n));
            if v {
                e.insert(i);
            }
        }
    }
    MuEncoding {
        model: MuModel::new(domain, programs, valuation),
        ..enc_shape
    }
}

/// Every domain element becomes both a world and an agent; `x ~a y` when
/// some `edge`-successor of `x` has `a` as `pi1`- and `y` as
/// `pi2`-successor, closed to an equivalence relation.
pub fn mu_model_to_ciel(m: &MuModel) -> CielModel {
    let n = m.len();
    let succ = |prog: &str| {
        let mut s = vec![Vec::new(); n];
        for &(a, b) in m.relation(prog) {
            s[a].push(b);
        }
        s
    };
    let pi1 = succ(PI1);
    let pi2 = succ(PI2);
    let mut rel: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &(x, xp) in m.relation(EDGE) {
        for &a in &pi1[xp] {
            for &y in &pi2[xp] {
                rel[a].push((x, y));
            }
        }
    }
    let indist = rel
        .into_iter()
        .map(|r| Partition::closure_of(n, r))
        .collect();
    let agents = (0..n)
        .map(|d| Agent {
            name: m.domain[d].clone(),
            valuation: m
                .valuation
                .iter()
                .map(|(atom, s)| (atom.clone(), s.contains(d)))
                .collect(),
        })
        .collect();
    let frame = Frame::new(m.domain.clone(), m.valuation.clone(), indist)
        .expect("domain names are distinct");
    CielModel::new(frame, AgentModel::new(agents, AgentTheory::empty()))
        .expect("agents are the distinct domain elements")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu(s: &str) -> MuFormula {
        MuFormula::parse(s).unwrap()
    }

    fn chain(p_at: &[usize]) -> MuModel {
        let mut p = FixedBitSet::with_capacity(3);
        p.extend(p_at.iter().copied());
        MuModel::new(
            vec!["a".into(), "b".into(), "c".into()],
            BTreeMap::from([("r".to_string(), vec![(0, 1), (1, 2)])]),
            BTreeMap::from([("p".to_string(), p)]),
        )
    }

    #[test]
    fn positivity() {
        for ok in ["nu z. z", "nu z. p & [r] z", "nu z. ~~z", "nu z. ~[r] ~z", "nu z. ~(nu z. ~~z)"] {
            assert!(MuFormula::parse(ok).is_ok(), "{ok}");
        }
        for bad in ["nu z. ~z", "nu z. p -> z & q | ~z", "nu z. z -> p", "nu z. [r] ~(p & z)"] {
            assert!(MuFormula::parse(bad).is_err(), "{bad}");
        }
        assert!(MuFormula::nu(MuFormula::Var.neg()).is_err());
        assert!(MuFormula::mu(MuFormula::Var.neg()).is_err());
    }

    #[test]
    fn parse_print_roundtrip() {
        for s in [
            "nu z. p & [edge] (<pi1> q -> [pi2] z)",
            "[pi2^-] (<pi1> q -> [edge^-] z)",
            "<r^-> p",
            "(nu z. z) & q",
        ] {
            let f = mu(s);
            assert_eq!(mu(&f.to_string()), f, "{s}");
        }
        assert_eq!(mu("<r^->p"), MuFormula::diamond(Program::converse("r"), MuFormula::atom("p")));
        assert_eq!(mu("(nu z. z) & q").to_string(), "(nu z. z) & q");
    }

    #[test]
    fn evaluation() {
        let m = chain(&[0, 1, 2]);
        let mut u = FixedBitSet::with_capacity(3);
        u.insert(1);
        assert_eq!(m.eval(&MuFormula::Var, &u), u);
        assert_eq!(m.eval_closed(&mu("nu z. z")).count_ones(..), 3);
        assert_eq!(m.eval_closed(&mu("nu z. p & [r] z")).count_ones(..), 3);
        let m = chain(&[0, 1]);
        assert_eq!(m.eval_closed(&mu("nu z. p & [r] z")).count_ones(..), 0);
        let its = m.nu_iterates(&mu("p & [r] z"));
        assert!(its.len() <= m.len() + 1);
        assert!(its.windows(2).all(|w| w[1].is_subset(&w[0])));
        // least fixpoint: worlds from which p-less c is reachable along r
        let reach = m.eval_closed(&mu("mu z. ~p | <r> z"));
        assert_eq!(reach.ones().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(m.eval_closed(&mu("[r^-] false")).contains(0));
        assert!(!m.eval_closed(&mu("[r^-] false")).contains(1));
    }

    #[test]
    fn translation_shape_and_size() {
        let t = translate_t(&WorldFormula::parse("C[q] p").unwrap()).unwrap();
        assert_eq!(t, mu("nu z. p & [edge] (<pi1> q -> [pi2] z) & [pi2^-] (<pi1> q -> [edge^-] z)"));
        assert_eq!(t.size(), 1 + 21 + 2);
        assert_eq!(translate_t(&WorldFormula::parse("p").unwrap()).unwrap(), mu("p"));
        assert_eq!(
            translate_t(&WorldFormula::parse("C[edge] p").unwrap()),
            Err(MuError::Reserved("edge".into()))
        );
    }

    #[test]
    fn encoding_shape() {
        use crate::semantics::{validate, ModelFile, ValidationMode};
        let file = ModelFile {
            worlds: vec!["x".into()],
            agents: vec![Agent { name: "a".into(), valuation: BTreeMap::new() }],
            indist: BTreeMap::from([("a".to_string(), vec![("x".to_string(), "x".to_string())])]),
            ..Default::default()
        };
        let m = validate(&file, ValidationMode::Strict).unwrap();
        let enc = ciel_model_to_mu(&m);
        assert_eq!(enc.model.len(), 1 + 1 + 1);
        assert_eq!(enc.model.relation(EDGE), &[(1, 2)]);
        let back = mu_model_to_ciel(&enc.model);
        assert_eq!(back.len(), 3);

        let empty = MuModel::new(vec!["u".into(), "v".into()], BTreeMap::new(), BTreeMap::new());
        let c = mu_model_to_ciel(&empty);
        assert!(c.frame().indist().iter().all(|p| *p == Partition::identity(2)));
    }
}

//! Printer shared by all formula languages.
//!
//! Output re-sugars exactly the shapes the parser expands (`true`, `|`,
//! `->`, duals), so printing and re-parsing a core tree is the identity.

use std::borrow::Cow;

pub(crate) enum View<'a, F> {
    Falsum,
    Leaf(Cow<'a, str>),
    Not(&'a F),
    And(&'a F, &'a F),
    /// Prefix operator such as `C[psi] ` or `nu z. `. `dual` is the spelling
    /// of `~op ~body`, if the language has one. Loose prefixes extend as far
    /// right as possible and sit at the lowest precedence level.
    Prefix {
        text: String,
        dual: Option<String>,
        loose: bool,
        body: &'a F,
    },
}

pub(crate) trait Printable: Sized {
    fn view(&self) -> View<'_, Self>;
}

const TOP: u8 = 0;
const IMP: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

pub(crate) fn render<F: Printable>(f: &F) -> String {
    let mut out = String::new();
    write(f, TOP, &mut out);
    out
}

fn level<F: Printable>(f: &F) -> u8 {
    match sugar(f) {
        Sugared::Or(..) => OR,
        Sugared::Imp(..) => IMP,
        Sugared::Plain => match f.view() {
            View::And(..) => AND,
            View::Prefix { loose: true, .. } => TOP,
            _ => UNARY,
        },
        Sugared::Dual { loose: true, .. } => TOP,
        _ => UNARY,
    }
}

enum Sugared<'a, F> {
    True,
    Or(&'a F, &'a F),
    Imp(&'a F, &'a F),
    Dual {
        text: String,
        loose: bool,
        body: &'a F,
    },
    Plain,
}

fn strip_not<F: Printable>(f: &F) -> Option<&F> {
    match f.view() {
        View::Not(g) => Some(g),
        _ => None,
    }
}

fn sugar<F: Printable>(f: &F) -> Sugared<'_, F> {
    let View::Not(inner) = f.view() else {
        return Sugared::Plain;
    };
    match inner.view() {
        View::Falsum => Sugared::True,
        View::And(a, b) => match (strip_not(a), strip_not(b)) {
            (Some(x), Some(y)) => Sugared::Or(x, y),
            (_, Some(y)) => Sugared::Imp(a, y),
            _ => Sugared::Plain,
        },
        View::Prefix {
            dual: Some(text),
            loose,
            body,
            ..
        } => match strip_not(body) {
            Some(b) => Sugared::Dual {
                text,
                loose,
                body: b,
            },
            None => Sugared::Plain,
        },
        _ => Sugared::Plain,
    }
}

fn write<F: Printable>(f: &F, ctx: u8, out: &mut String) {
    let paren = level(f) < ctx;
    if paren {
        out.push('(');
    }
    match sugar(f) {
        Sugared::True => out.push_str("true"),
        Sugared::Or(a, b) => {
            write(a, OR, out);
            out.push_str(" | ");
            write(b, AND, out);
        }
        Sugared::Imp(a, b) => {
            write(a, OR, out);
            out.push_str(" -> ");
            write(b, IMP, out);
        }
        Sugared::Dual { text, loose, body } => {
            out.push_str(&text);
            write(body, if loose { TOP } else { UNARY }, out);
        }
        Sugared::Plain => match f.view() {
            View::Falsum => out.push_str("false"),
            View::Leaf(s) => out.push_str(&s),
            View::Not(g) => {
                out.push('~');
                write(g, UNARY, out);
            }
            View::And(a, b) => {
                write(a, AND, out);
                out.push_str(" & ");
                write(b, UNARY, out);
            }
            View::Prefix {
                text, loose, body, ..
            } => {
                out.push_str(&text);
                write(body, if loose { TOP } else { UNARY }, out);
            }
        },
    }
    if paren {
        out.push(')');
    }
}

impl Printable for super::AgentFormula {
    fn view(&self) -> View<'_, Self> {
        use super::AgentFormula::*;
        match self {
            Falsum => View::Falsum,
            Atom(a) => View::Leaf(Cow::Borrowed(a)),
            Not(f) => View::Not(f),
            And(a, b) => View::And(a, b),
        }
    }
}

impl Printable for super::WorldFormula {
    fn view(&self) -> View<'_, Self> {
        use super::WorldFormula::*;
        match self {
            Falsum => View::Falsum,
            Atom(a) => View::Leaf(Cow::Borrowed(a)),
            Not(f) => View::Not(f),
            And(a, b) => View::And(a, b),
            C(psi, body) => {
                let index = render(psi);
                View::Prefix {
                    text: format!("C[{index}] "),
                    dual: Some(format!("P[{index}] ")),
                    loose: false,
                    body,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::formula::{AgentFormula, WorldFormula};

    fn roundtrip(s: &str) -> String {
        WorldFormula::parse(s).unwrap().to_string()
    }

    #[test]
    fn prints_sugar_back() {
        assert_eq!(roundtrip("p -> q"), "p -> q");
        assert_eq!(roundtrip("p | q & r"), "p | q & r");
        assert_eq!(roundtrip("(p | q) & r"), "(p | q) & r");
        assert_eq!(roundtrip("P[a] p"), "P[a] p");
        assert_eq!(roundtrip("C[p_alice | p_bob] x"), "C[p_alice | p_bob] x");
        assert_eq!(roundtrip("~(p & q)"), "~(p & q)");
        assert_eq!(roundtrip("(p -> q) -> r"), "p & ~q | r");
        assert_eq!(roundtrip("(p & q -> r) -> s"), "p & q & ~r | s");
        assert_eq!(roundtrip("p & (q & r)"), "p & (q & r)");
        assert_eq!(roundtrip("C[a] (p & q)"), "C[a] (p & q)");
        assert_eq!(roundtrip("true & false"), "true & false");
    }

    #[test]
    fn agent_printing() {
        let f = AgentFormula::parse("~a & (b | c)").unwrap();
        assert_eq!(f.to_string(), "~a & (b | c)");
    }
}

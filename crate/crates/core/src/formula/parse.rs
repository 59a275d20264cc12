//! Recursive-descent parser shared by the world, agent, group and
//! mu-calculus grammars.
//!
//! Precedence, loosest first: `<->`, `->` (right associative), `|`, `&`,
//! then prefix operators (`~`, modalities). `nu z.` / `mu z.` take the
//! widest possible body.

use thiserror::Error;

use super::{AgentFormula, Boolean, WorldFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownOperator,
    Unbalanced,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Comma,
    Dot,
    Tilde,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Caret,
    Minus,
    Top,
    Bot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    fn spelling(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Tilde => "~",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::DArrow => "<->",
            Tok::Caret => "^",
            Tok::Minus => "-",
            Tok::Top => "true",
            Tok::Bot => "false",
            Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        let mut width = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                column = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                column += 1;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i + width < chars.len()
                    && (chars[i + width].is_ascii_alphanumeric() || chars[i + width] == '_')
                {
                    width += 1;
                }
                let word: String = chars[start..start + width].iter().collect();
                match word.as_str() {
                    "true" => Tok::Top,
                    "false" => Tok::Bot,
                    _ => Tok::Ident(word),
                }
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '~' | '¬' | '!' => Tok::Tilde,
            '&' | '∧' => Tok::Amp,
            '|' | '∨' => Tok::Bar,
            '^' => Tok::Caret,
            '>' => Tok::Gt,
            '→' => Tok::Arrow,
            '↔' => Tok::DArrow,
            '⊤' => Tok::Top,
            '⊥' => Tok::Bot,
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    width = 2;
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    width = 3;
                    Tok::DArrow
                } else {
                    Tok::Lt
                }
            }
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::UnknownOperator,
                    line,
                    column,
                    message: format!("unknown operator `{other}`"),
                })
            }
        };
        out.push((tok, pos));
        i += width;
        column += width;
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

pub(crate) struct Parser {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
}

/// A formula language the shared parser can read.
pub(crate) trait Grammar: Boolean {
    /// Parse a prefix-level formula: atoms, modalities and anything the
    /// language adds on top of `~`, constants and parentheses.
    fn unary(p: &mut Parser) -> Result<Self, ParseError>;
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            idx: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    pub(crate) fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.idx + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub(crate) fn error(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        let pos = self.toks[self.idx].1;
        ParseError {
            kind,
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    pub(crate) fn unexpected(&self, expected: &str) -> ParseError {
        let found = self.peek();
        let kind = match found {
            Tok::Eof | Tok::RParen | Tok::RBrack | Tok::RBrace => ParseErrorKind::Unbalanced,
            _ => ParseErrorKind::Syntax,
        };
        self.error(
            kind,
            format!("expected {expected}, found {}", found.describe()),
        )
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", tok.spelling())))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            Tok::RParen | Tok::RBrack | Tok::RBrace => Err(self.error(
                ParseErrorKind::Unbalanced,
                format!("unmatched {}", self.peek().describe()),
            )),
            _ => Err(self.unexpected("end of input")),
        }
    }

    /// Full expression at the loosest precedence level.
    pub(crate) fn expr<F: Grammar>(&mut self) -> Result<F, ParseError> {
        let mut lhs = self.implication::<F>()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.implication::<F>()?;
            lhs = lhs.iff(rhs);
        }
        Ok(lhs)
    }

    fn implication<F: Grammar>(&mut self) -> Result<F, ParseError> {
        let lhs = self.disjunction::<F>()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication::<F>()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction<F: Grammar>(&mut self) -> Result<F, ParseError> {
        let mut lhs = self.conjunction::<F>()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction::<F>()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conjunction<F: Grammar>(&mut self) -> Result<F, ParseError> {
        let mut lhs = F::unary(self)?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = F::unary(self)?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    /// Prefix forms every language shares. Returns `None` when the next
    /// token starts something language specific.
    pub(crate) fn common_unary<F: Grammar>(&mut self) -> Result<Option<F>, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Some(F::unary(self)?.neg()))
            }
            Tok::Top => {
                self.bump();
                Ok(Some(F::verum()))
            }
            Tok::Bot => {
                self.bump();
                Ok(Some(F::falsum()))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr::<F>()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(Some(inner))
            }
            _ => Ok(None),
        }
    }
}

impl Grammar for AgentFormula {
    fn unary(p: &mut Parser) -> Result<Self, ParseError> {
        if let Some(f) = p.common_unary::<Self>()? {
            return Ok(f);
        }
        match p.peek().clone() {
            Tok::Ident(name) => {
                p.bump();
                Ok(AgentFormula::Atom(name))
            }
            _ => Err(p.unexpected("agent formula")),
        }
    }
}

impl Grammar for WorldFormula {
    fn unary(p: &mut Parser) -> Result<Self, ParseError> {
        if let Some(f) = p.common_unary::<Self>()? {
            return Ok(f);
        }
        match p.peek().clone() {
            Tok::Ident(name) => {
                let is_modal = (name == "C" || name == "P") && *p.peek_at(1) == Tok::LBrack;
                p.bump();
                if !is_modal {
                    return Ok(WorldFormula::Atom(name));
                }
                p.bump();
                let index = p.expr::<AgentFormula>()?;
                p.expect(Tok::RBrack)?;
                let body = WorldFormula::unary(p)?;
                Ok(if name == "C" {
                    WorldFormula::common(index, body)
                } else {
                    WorldFormula::possible(index, body)
                })
            }
            _ => Err(p.unexpected("formula")),
        }
    }
}

pub(crate) fn parse_all<F: Grammar>(text: &str) -> Result<F, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.expr::<F>()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_world(text: &str) -> Result<WorldFormula, ParseError> {
    parse_all(text)
}

pub fn parse_agent(text: &str) -> Result<AgentFormula, ParseError> {
    parse_all(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Boolean;

    fn a(s: &str) -> AgentFormula {
        AgentFormula::atom(s)
    }
    fn w(s: &str) -> WorldFormula {
        WorldFormula::atom(s)
    }

    #[test]
    fn parses_common_knowledge() {
        let f = parse_world("C[doctor] smoking_bad").unwrap();
        assert_eq!(f, WorldFormula::common(a("doctor"), w("smoking_bad")));
    }

    #[test]
    fn parses_nested_modalities() {
        let f = parse_world("C[hasChildTeen] C[Teenager] ep").unwrap();
        assert_eq!(
            f,
            WorldFormula::common(
                a("hasChildTeen"),
                WorldFormula::common(a("Teenager"), w("ep"))
            )
        );
    }

    #[test]
    fn implication_is_expanded() {
        let f = parse_world("p -> q").unwrap();
        assert_eq!(
            f,
            WorldFormula::Not(Box::new(WorldFormula::And(
                Box::new(w("p")),
                Box::new(WorldFormula::Not(Box::new(w("q"))))
            )))
        );
    }

    #[test]
    fn precedence() {
        // ~ > & > | > -> > <->
        assert_eq!(
            parse_world("~p & q | r").unwrap(),
            w("p").neg().and(w("q")).or(w("r"))
        );
        assert_eq!(
            parse_world("p -> q -> r").unwrap(),
            w("p").implies(w("q").implies(w("r")))
        );
        assert_eq!(
            parse_world("p | q -> r <-> s").unwrap(),
            w("p").or(w("q")).implies(w("r")).iff(w("s"))
        );
        // modalities bind tighter than binary connectives
        assert_eq!(
            parse_world("C[a] p & q").unwrap(),
            WorldFormula::common(a("a"), w("p")).and(w("q"))
        );
        assert_eq!(
            parse_world("P[a | b] p").unwrap(),
            WorldFormula::possible(a("a").or(a("b")), w("p"))
        );
    }

    #[test]
    fn constants_and_unicode() {
        assert_eq!(parse_world("true").unwrap(), WorldFormula::verum());
        assert_eq!(parse_world("⊥").unwrap(), WorldFormula::Falsum);
        assert_eq!(
            parse_world("¬p ∧ q → r").unwrap(),
            parse_world("~p & q -> r").unwrap()
        );
    }

    #[test]
    fn atom_named_c_without_bracket() {
        assert_eq!(parse_world("C & P").unwrap(), w("C").and(w("P")));
    }

    #[test]
    fn error_positions() {
        let e = parse_world("p &\n  & q").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert_eq!(e.kind, ParseErrorKind::Syntax);

        let e = parse_world("p $ q").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownOperator);
        assert_eq!((e.line, e.column), (1, 3));

        let e = parse_world("(p & q").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unbalanced);
        let e = parse_world("p & q)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unbalanced);
        let e = parse_world("C[a p").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        let e = parse_world("").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unbalanced);
    }

    #[test]
    fn agent_formulas_reject_modalities() {
        assert!(parse_agent("C[a] b").is_err());
        assert_eq!(parse_agent("a & ~b").unwrap(), a("a").and(a("b").neg()));
    }
}

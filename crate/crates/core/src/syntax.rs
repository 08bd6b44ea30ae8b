//! The rule-file format.
//!
//! ```text
//! ; McCarthy 91
//! SIG f/1
//! f(x) -> f(f(s^11(x)))  [s^101(0) > x]
//! f(x) -> p^10(x)        [!(s^101(0) > x)]
//! s(p(x)) -> x
//! p(s(x)) -> x
//! ```
//!
//! One declaration or rule per line; `;` starts a comment. `s`, `p`, `+`,
//! `-` and integer literals are interpreted. Every other applied name must
//! be declared with `SIG`; bare undeclared names are variables.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::lia::{Comparison, Formula};
use crate::rules::{check_rule_wellformed, ConstrainedRule, Trs};
use crate::term::{Symbol, Term};

/// 1-based source location.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Default)]
pub struct CtrsDocument {
    /// Declared uninterpreted symbols in declaration order.
    pub signature: Vec<Symbol>,
    pub rules: Vec<ConstrainedRule>,
    /// `spans[i]` is where `rules[i]` starts.
    pub spans: Vec<Span>,
}

/// Equality ignores source locations.
impl PartialEq for CtrsDocument {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature && self.rules == other.rules
    }
}

impl Eq for CtrsDocument {}

impl CtrsDocument {
    pub fn trs(&self) -> Trs {
        Trs::new(self.rules.clone())
    }
}

impl fmt::Display for CtrsDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.signature.is_empty() {
            f.write_str("SIG")?;
            for s in &self.signature {
                write!(f, " {}/{}", s, s.arity())?;
            }
            writeln!(f)?;
        }
        for r in &self.rules {
            if r.constraint == Formula::True {
                writeln!(f, "{} -> {}", r.lhs, r.rhs)?;
            } else {
                writeln!(f, "{r}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Arrow,
    Plus,
    Minus,
    Cmp(Comparison),
    Not,
    And,
    Or,
    Implies,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(n) => return write!(f, "`{n}`"),
            Tok::Caret => "^",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Arrow => "->",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Cmp(c) => match c {
                Comparison::Eq => "=",
                Comparison::Ne => "!=",
                Comparison::Gt => ">",
                Comparison::Ge => ">=",
                Comparison::Lt => "<",
                Comparison::Le => "<=",
            },
            Tok::Not => "!",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::Implies => "=>",
        };
        write!(f, "`{s}`")
    }
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// Tokens of one line with their 1-based columns.
fn lex(line_no: usize, text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == ';' {
            break;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits
                .parse()
                .map_err(|_| err(line_no, col, format!("integer literal {digits} is out of range")))?;
            out.push((Tok::Int(n), col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let (tok, len) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', Some('>')) => (Tok::Implies, 2),
            ('>', Some('=')) => (Tok::Cmp(Comparison::Ge), 2),
            ('<', Some('=')) => (Tok::Cmp(Comparison::Le), 2),
            ('!', Some('=')) => (Tok::Cmp(Comparison::Ne), 2),
            ('/', Some('\\')) => (Tok::And, 2),
            ('\\', Some('/')) => (Tok::Or, 2),
            ('=', _) => (Tok::Cmp(Comparison::Eq), 1),
            ('>', _) => (Tok::Cmp(Comparison::Gt), 1),
            ('<', _) => (Tok::Cmp(Comparison::Lt), 1),
            ('!', _) => (Tok::Not, 1),
            ('^', _) => (Tok::Caret, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('#', _) => {
                return Err(err(
                    line_no,
                    col,
                    "marked symbols are derived and cannot appear in input",
                ))
            }
            _ => return Err(err(line_no, col, format!("unexpected character `{c}`"))),
        };
        out.push((tok, col));
        i += len;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    sig: &'a BTreeMap<String, Symbol>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        err(self.line, self.col(), msg)
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of line")),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = self.primary()?;
        loop {
            let sym = if self.eat(&Tok::Plus) {
                Symbol::plus()
            } else if self.eat(&Tok::Minus) {
                Symbol::minus()
            } else {
                return Ok(t);
            };
            let rhs = self.primary()?;
            t = Term::app(sym, vec![t, rhs]);
        }
    }

    fn primary(&mut self) -> Result<Term> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Term::Int(n))
            }
            Some(Tok::Minus) if matches!(self.toks.get(self.pos + 1), Some((Tok::Int(_), _))) => {
                self.pos += 1;
                let Some((Tok::Int(n), _)) = self.toks.get(self.pos).cloned() else {
                    unreachable!()
                };
                self.pos += 1;
                Ok(Term::Int(-n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat(&Tok::Caret) {
                    let n = match self.peek() {
                        Some(Tok::Int(n)) => *n,
                        _ => return Err(self.unexpected("an exponent")),
                    };
                    self.pos += 1;
                    let dir = match name.as_str() {
                        "s" => 1,
                        "p" => -1,
                        _ => return Err(err(self.line, col, format!("only s and p take an exponent, not `{name}`"))),
                    };
                    self.expect(&Tok::LParen)?;
                    let inner = self.term()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Term::tower(dir * n, inner));
                }
                if self.peek() != Some(&Tok::LParen) {
                    return match self.sig.get(&name) {
                        Some(f) if f.arity() == 0 => Ok(Term::app(f.clone(), vec![])),
                        Some(f) => Err(err(self.line, col, format!("`{name}` expects {} argument(s)", f.arity()))),
                        None if Symbol::is_reserved_name(&name) => {
                            Err(err(self.line, col, format!("`{name}` is interpreted and needs an argument")))
                        }
                        None => Ok(Term::var(&name)),
                    };
                }
                self.pos += 1;
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        args.push(self.term()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        if !self.eat(&Tok::Comma) {
                            return Err(self.unexpected("`,` or `)`"));
                        }
                    }
                }
                let sym = match Symbol::lookup_interpreted(&name, args.len()) {
                    Some(s) => s,
                    None => match self.sig.get(&name) {
                        Some(f) if f.arity() == args.len() => f.clone(),
                        Some(f) => {
                            return Err(err(
                                self.line,
                                col,
                                format!("`{name}` expects {} argument(s), got {}", f.arity(), args.len()),
                            ))
                        }
                        None if Symbol::is_reserved_name(&name) => {
                            return Err(err(self.line, col, format!("wrong number of arguments for `{name}`")))
                        }
                        None => return Err(err(self.line, col, format!("undeclared symbol `{name}`"))),
                    },
                };
                Ok(Term::app(sym, args))
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            return Ok(Formula::implies(lhs, self.formula()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.eat(&Tok::Or) {
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat(&Tok::And) {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        match self.peek() {
            Some(Tok::Ident(w)) if w == "true" || w == "false" => {
                let f = if w == "true" { Formula::True } else { Formula::False };
                self.pos += 1;
                return Ok(f);
            }
            Some(Tok::LParen) => {
                // either a parenthesized formula or a parenthesized term
                // starting an atom
                let save = self.pos;
                self.pos += 1;
                if let Ok(f) = self.formula() {
                    if self.eat(&Tok::RParen)
                        && !matches!(self.peek(), Some(Tok::Cmp(_) | Tok::Plus | Tok::Minus))
                    {
                        return Ok(f);
                    }
                }
                self.pos = save;
            }
            _ => {}
        }
        let a = self.term()?;
        let op = match self.peek() {
            Some(Tok::Cmp(op)) => *op,
            _ => return Err(self.unexpected("a comparison")),
        };
        self.pos += 1;
        let b = self.term()?;
        Ok(Formula::atom(op, a, b))
    }

    fn at_end(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of line")),
        }
    }
}

/// Reads the `name/arity` words of a `SIG` line into the signature.
fn declare(line: usize, text: &str, offset: usize, sig: &mut BTreeMap<String, Symbol>, order: &mut Vec<Symbol>) -> Result<()> {
    let mut col = offset;
    for word in text.split(char::is_whitespace) {
        let here = col;
        col += word.chars().count() + 1;
        if word.is_empty() {
            continue;
        }
        let Some((name, arity)) = word.rsplit_once('/') else {
            return Err(err(line, here, format!("expected name/arity, found `{word}`")));
        };
        let valid_name = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
        if !valid_name {
            return Err(err(line, here, format!("invalid symbol name `{name}`")));
        }
        if Symbol::is_reserved_name(name) || matches!(name, "true" | "false" | "SIG") {
            return Err(err(line, here, format!("`{name}` is reserved")));
        }
        let arity: usize = arity
            .parse()
            .map_err(|_| err(line, here, format!("invalid arity `{arity}`")))?;
        match sig.get(name) {
            Some(old) if old.arity() != arity => {
                return Err(err(line, here, format!("`{name}` is already declared with arity {}", old.arity())))
            }
            Some(_) => {}
            None => {
                let sym = Symbol::uninterpreted(name, arity);
                sig.insert(name.to_string(), sym.clone());
                order.push(sym);
            }
        }
    }
    Ok(())
}

/// Parses a rule file. Every rule is checked for well-formedness.
pub fn parse_ctrs(text: &str) -> Result<CtrsDocument> {
    let mut sig: BTreeMap<String, Symbol> = BTreeMap::new();
    let mut doc = CtrsDocument::default();
    let mut pending: Vec<(usize, String)> = Vec::new();

    // declarations first so rules may precede them
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(';').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        if let Some(rest) = trimmed.strip_prefix("SIG") {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                declare(line, rest, indent + 4, &mut sig, &mut doc.signature)?;
                continue;
            }
        }
        pending.push((line, content.to_string()));
    }

    for (line, content) in pending {
        let toks = lex(line, &content)?;
        let end_col = content.chars().count() + 1;
        let start_col = toks.first().map_or(1, |(_, c)| *c);
        let mut p = Parser {
            toks,
            pos: 0,
            line,
            end_col,
            sig: &sig,
        };
        let lhs = p.term()?;
        p.expect(&Tok::Arrow)?;
        let rhs = p.term()?;
        let constraint = if p.eat(&Tok::LBracket) {
            let f = p.formula()?;
            p.expect(&Tok::RBracket)?;
            f
        } else {
            Formula::True
        };
        p.at_end()?;
        let rule = ConstrainedRule::new(lhs, rhs, constraint);
        if let Some(v) = check_rule_wellformed(&rule).first() {
            return Err(err(line, start_col, format!("ill-formed rule: {v}")));
        }
        doc.rules.push(rule);
        doc.spans.push(Span { line, col: start_col });
    }
    Ok(doc)
}

//! First-order terms over a split signature: uninterpreted symbols, the
//! interpreted integer symbols (`s`, `p`, `+`, `-`, literals) and marked
//! symbols that only ever appear at the head of a dependency pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::Error;

/// Suffix used when printing marked symbols.
pub const MARK: char = '#';

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SymbolKind {
    Uninterpreted,
    Interpreted,
    Marked,
}

/// A function symbol. Marked symbols keep the base name and differ only in
/// their kind, so `f` and `f#` never compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
    kind: SymbolKind,
}

impl Symbol {
    pub fn uninterpreted(name: &str, arity: usize) -> Symbol {
        Symbol {
            name: name.into(),
            arity,
            kind: SymbolKind::Uninterpreted,
        }
    }

    pub fn succ() -> Symbol {
        Symbol::interp("s", 1)
    }

    pub fn pred() -> Symbol {
        Symbol::interp("p", 1)
    }

    pub fn plus() -> Symbol {
        Symbol::interp("+", 2)
    }

    pub fn minus() -> Symbol {
        Symbol::interp("-", 2)
    }

    fn interp(name: &str, arity: usize) -> Symbol {
        Symbol {
            name: name.into(),
            arity,
            kind: SymbolKind::Interpreted,
        }
    }

    /// The interpreted symbol with this name and arity, if there is one.
    pub fn lookup_interpreted(name: &str, arity: usize) -> Option<Symbol> {
        match (name, arity) {
            ("s", 1) => Some(Symbol::succ()),
            ("p", 1) => Some(Symbol::pred()),
            ("+", 2) => Some(Symbol::plus()),
            ("-", 2) => Some(Symbol::minus()),
            _ => None,
        }
    }

    pub fn is_reserved_name(name: &str) -> bool {
        matches!(name, "s" | "p" | "+" | "-") || name.contains(MARK)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn is_interpreted(&self) -> bool {
        self.kind == SymbolKind::Interpreted
    }

    pub fn is_marked(&self) -> bool {
        self.kind == SymbolKind::Marked
    }

    /// The marked counterpart `f#` of a defined symbol `f`.
    pub fn marked(&self) -> Symbol {
        debug_assert!(!self.is_marked(), "symbol {self} is already marked");
        Symbol {
            name: self.name.clone(),
            arity: self.arity,
            kind: SymbolKind::Marked,
        }
    }

    /// Drops the mark. The base kind is recovered from the reserved names.
    pub fn unmarked(&self) -> Symbol {
        match self.kind {
            SymbolKind::Marked => Symbol::lookup_interpreted(&self.name, self.arity)
                .unwrap_or_else(|| Symbol::uninterpreted(&self.name, self.arity)),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::Marked => write!(f, "{}{}", self.name, MARK),
            _ => f.write_str(&self.name),
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self, self.arity)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// A term. Integer literals are first-class interpreted constants; `0` is
/// `Int(0)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Int(i64),
    App(Symbol, Vec<Term>),
}

/// A path of 1-based argument indices; the empty path is the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut path = self.0.clone();
        path.push(i);
        Position(path)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    /// Builds an application; panics on an arity mismatch, which is always a
    /// programming error since the parser checks arities.
    pub fn app(symbol: Symbol, args: Vec<Term>) -> Term {
        assert_eq!(
            symbol.arity(),
            args.len(),
            "arity mismatch for {symbol:?}"
        );
        Term::App(symbol, args)
    }

    pub fn succ(t: Term) -> Term {
        Term::App(Symbol::succ(), vec![t])
    }

    pub fn pred(t: Term) -> Term {
        Term::App(Symbol::pred(), vec![t])
    }

    /// `s^n(t)` for `n >= 0`, or `p^-n(t)` for negative `n`.
    pub fn tower(n: i64, t: Term) -> Term {
        let mut out = t;
        for _ in 0..n.unsigned_abs() {
            out = if n > 0 { Term::succ(out) } else { Term::pred(out) };
        }
        out
    }

    /// The numeral for `n` as an `s`/`p` tower over `0`.
    pub fn numeral(n: i64) -> Term {
        Term::tower(n, Term::Int(0))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::App(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Membership in `T(G_int, V)`: only interpreted symbols and literals.
    pub fn is_interpreted(&self) -> bool {
        match self {
            Term::Var(_) | Term::Int(_) => true,
            Term::App(f, args) => f.is_interpreted() && args.iter().all(Term::is_interpreted),
        }
    }

    /// Membership in `T(G_int, vars)`.
    pub fn is_interpreted_over(&self, vars: &BTreeSet<Var>) -> bool {
        match self {
            Term::Var(x) => vars.contains(x),
            Term::Int(_) => true,
            Term::App(f, args) => {
                f.is_interpreted() && args.iter().all(|a| a.is_interpreted_over(vars))
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Every symbol occurring in the term.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t, _| {
            if let Term::App(f, _) = t {
                out.insert(f.clone());
            }
        });
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Pre-order traversal with positions.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term, &Position)) {
        fn go<'a>(t: &'a Term, pos: &mut Vec<usize>, f: &mut impl FnMut(&'a Term, &Position)) {
            f(t, &Position(pos.clone()));
            if let Term::App(_, args) = t {
                for (i, a) in args.iter().enumerate() {
                    pos.push(i + 1);
                    go(a, pos, f);
                    pos.pop();
                }
            }
        }
        go(self, &mut Vec::new(), f)
    }

    /// All `(position, subterm)` pairs in pre-order.
    pub fn subterms(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::new();
        self.visit(&mut |t, p| out.push((p.clone(), t)));
        out
    }

    pub fn subterm_at(&self, pos: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &pos.0 {
            t = t.args().get(i.checked_sub(1)?)?;
        }
        Some(t)
    }

    pub fn replace_at(&self, pos: &Position, u: Term) -> Result<Term, Error> {
        fn go(t: &Term, path: &[usize], u: Term, full: &Position) -> Result<Term, Error> {
            let Some((&i, rest)) = path.split_first() else {
                return Ok(u);
            };
            match t {
                Term::App(f, args) if i >= 1 && i <= args.len() => {
                    let mut out = Vec::with_capacity(args.len());
                    out.extend_from_slice(&args[..i - 1]);
                    out.push(go(&args[i - 1], rest, u, full)?);
                    out.extend_from_slice(&args[i..]);
                    Ok(Term::App(f.clone(), out))
                }
                _ => Err(Error::InvalidPosition(full.clone())),
            }
        }
        go(self, &pos.0, u, pos)
    }

    pub fn apply(&self, sigma: &Substitution) -> Term {
        match self {
            Term::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Int(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(sigma)).collect()),
        }
    }

    /// Appends `suffix` to every variable name.
    pub fn rename_vars(&self, suffix: &str) -> Term {
        match self {
            Term::Var(x) => Term::var(&format!("{}{}", x.name(), suffix)),
            Term::Int(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.rename_vars(suffix)).collect())
            }
        }
    }

    /// `t#` for a term rooted by a defined symbol.
    pub fn mark_root(&self) -> Option<Term> {
        match self {
            Term::App(f, args) if !f.is_marked() => Some(Term::App(f.marked(), args.clone())),
            _ => None,
        }
    }

    /// Whether a marked symbol occurs strictly below the root.
    pub fn has_nested_mark(&self) -> bool {
        self.args()
            .iter()
            .any(|a| a.symbols().iter().any(Symbol::is_marked))
    }
}

/// A finite map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Var, t: Term) -> Option<Term> {
        self.0.insert(x, t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether every variable of `vars` in the domain is mapped into
    /// `T(G_int, V)`.
    pub fn is_interpreted_on(&self, vars: &BTreeSet<Var>) -> bool {
        vars.iter()
            .filter_map(|x| self.0.get(x))
            .all(Term::is_interpreted)
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

/// Syntactic matching: the unique `σ` with `pattern σ = subject`, if any.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    match_into(pattern, subject, &mut sigma).then_some(sigma)
}

fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(x), _) => match sigma.get(x) {
            Some(bound) => bound == subject,
            None => {
                sigma.insert(x.clone(), subject.clone());
                true
            }
        },
        (Term::Int(a), Term::Int(b)) => a == b,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.iter().zip(ys).all(|(x, y)| match_into(x, y, sigma))
        }
        _ => false,
    }
}

fn is_infix(t: &Term) -> bool {
    matches!(t, Term::App(f, _) if f.is_interpreted() && f.arity() == 2)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::App(sym, args) if is_infix(self) => {
                let side = |f: &mut fmt::Formatter<'_>, t: &Term| {
                    if is_infix(t) {
                        write!(f, "({t})")
                    } else {
                        write!(f, "{t}")
                    }
                };
                side(f, &args[0])?;
                write!(f, " {sym} ")?;
                side(f, &args[1])
            }
            Term::App(sym, args) if sym.arity() == 1 && sym.is_interpreted() => {
                // compress s/p towers: s(s(s(x))) prints as s^3(x)
                let mut n = 1;
                let mut inner = &args[0];
                while let Term::App(g, a) = inner {
                    if g != sym {
                        break;
                    }
                    n += 1;
                    inner = &a[0];
                }
                if n == 1 {
                    write!(f, "{sym}({inner})")
                } else {
                    write!(f, "{sym}^{n}({inner})")
                }
            }
            Term::App(sym, args) if args.is_empty() => write!(f, "{sym}"),
            Term::App(sym, args) => {
                write!(f, "{sym}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

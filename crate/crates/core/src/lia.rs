//! Constraints over the interpreted integer symbols and their evaluation in
//! the standard integer structure (`0`, `s = +1`, `p = -1`, `+`, `-`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::smt::{self, Expr, SolverConfig};
use crate::term::{Substitution, Term, Var};

/// Comparison predicates. `<`, `<=` and `!=` are normalized away by
/// [`Formula::atom`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    Eq,
    Gt,
    Ge,
}

impl Pred {
    pub fn symbol(self) -> &'static str {
        match self {
            Pred::Eq => "=",
            Pred::Gt => ">",
            Pred::Ge => ">=",
        }
    }
}

/// Surface comparison operators accepted by the parser.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Eq,
    Ne,
    Gt,
    Ge,
    Lt,
    Le,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Pred, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Builds a comparison, rewriting `<`, `<=` and `!=` into `>`, `>=` and a
    /// negated `=`.
    pub fn atom(op: Comparison, lhs: Term, rhs: Term) -> Formula {
        match op {
            Comparison::Eq => Formula::Atom(Pred::Eq, lhs, rhs),
            Comparison::Gt => Formula::Atom(Pred::Gt, lhs, rhs),
            Comparison::Ge => Formula::Atom(Pred::Ge, lhs, rhs),
            Comparison::Lt => Formula::Atom(Pred::Gt, rhs, lhs),
            Comparison::Le => Formula::Atom(Pred::Ge, rhs, lhs),
            Comparison::Ne => Formula::not(Formula::Atom(Pred::Eq, lhs, rhs)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn terms(&self) -> Vec<&Term> {
        match self {
            Formula::True | Formula::False => vec![],
            Formula::Atom(_, a, b) => vec![a, b],
            Formula::Not(f) => f.terms(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let mut v = a.terms();
                v.extend(b.terms());
                v
            }
        }
    }

    /// Membership in `Fol(G_int, P, V)`.
    pub fn is_interpreted(&self) -> bool {
        self.terms().into_iter().all(Term::is_interpreted)
    }

    pub fn apply(&self, sigma: &Substitution) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(p, a, b) => Formula::Atom(*p, a.apply(sigma), b.apply(sigma)),
            Formula::Not(f) => Formula::not(f.apply(sigma)),
            Formula::And(a, b) => Formula::and(a.apply(sigma), b.apply(sigma)),
            Formula::Or(a, b) => Formula::or(a.apply(sigma), b.apply(sigma)),
            Formula::Implies(a, b) => Formula::implies(a.apply(sigma), b.apply(sigma)),
        }
    }

    /// Truth value under an integer assignment to its variables.
    pub fn eval_with(&self, env: &BTreeMap<Var, i64>) -> Result<bool> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(p, a, b) => {
                let (x, y) = (eval_term_with(a, env)?, eval_term_with(b, env)?);
                match p {
                    Pred::Eq => x == y,
                    Pred::Gt => x > y,
                    Pred::Ge => x >= y,
                }
            }
            Formula::Not(f) => !f.eval_with(env)?,
            Formula::And(a, b) => a.eval_with(env)? && b.eval_with(env)?,
            Formula::Or(a, b) => a.eval_with(env)? || b.eval_with(env)?,
            Formula::Implies(a, b) => !a.eval_with(env)? || b.eval_with(env)?,
        })
    }

    /// SMT rendering; term variable `x` becomes the integer symbol
    /// `prefix ++ x`.
    pub fn to_expr(&self, prefix: &str) -> Result<Expr> {
        Ok(match self {
            Formula::True => Expr::True,
            Formula::False => Expr::False,
            Formula::Atom(p, a, b) => {
                let (a, b) = (term_to_expr(a, prefix)?, term_to_expr(b, prefix)?);
                match p {
                    Pred::Eq => Expr::eq(a, b),
                    Pred::Gt => Expr::gt(a, b),
                    Pred::Ge => Expr::ge(a, b),
                }
            }
            Formula::Not(f) => Expr::not(f.to_expr(prefix)?),
            Formula::And(a, b) => Expr::and(vec![a.to_expr(prefix)?, b.to_expr(prefix)?]),
            Formula::Or(a, b) => Expr::or(vec![a.to_expr(prefix)?, b.to_expr(prefix)?]),
            Formula::Implies(a, b) => Expr::implies(a.to_expr(prefix)?, b.to_expr(prefix)?),
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn sub(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
            match g {
                Formula::And(..) | Formula::Or(..) | Formula::Implies(..) => write!(f, "({g})"),
                _ => write!(f, "{g}"),
            }
        }
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(p, a, b) => write!(f, "{a} {} {b}", p.symbol()),
            Formula::Not(g) => match **g {
                Formula::Atom(..) | Formula::Not(..) | Formula::And(..) | Formula::Or(..) | Formula::Implies(..) => {
                    write!(f, "!({g})")
                }
                _ => write!(f, "!{g}"),
            },
            Formula::And(a, b) => {
                sub(f, a)?;
                f.write_str(" /\\ ")?;
                sub(f, b)
            }
            Formula::Or(a, b) => {
                sub(f, a)?;
                f.write_str(" \\/ ")?;
                sub(f, b)
            }
            Formula::Implies(a, b) => {
                sub(f, a)?;
                f.write_str(" => ")?;
                sub(f, b)
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn overflow(t: &Term) -> Error {
    Error::Overflow(t.to_string())
}

/// Value of a ground interpreted term.
pub fn eval_ground_term(t: &Term) -> Result<i64> {
    eval_term_with(t, &BTreeMap::new())
}

pub fn eval_term_with(t: &Term, env: &BTreeMap<Var, i64>) -> Result<i64> {
    match t {
        Term::Int(n) => Ok(*n),
        Term::Var(x) => env.get(x).copied().ok_or_else(|| Error::FreeVariable(x.clone())),
        Term::App(f, args) if f.is_interpreted() => {
            // s/p towers are evaluated iteratively to keep the stack flat
            let mut offset: i64 = 0;
            let mut cur = t;
            loop {
                match cur {
                    Term::App(g, a) if g.is_interpreted() && g.name() == "s" => {
                        offset = offset.checked_add(1).ok_or_else(|| overflow(t))?;
                        cur = &a[0];
                    }
                    Term::App(g, a) if g.is_interpreted() && g.name() == "p" => {
                        offset = offset.checked_sub(1).ok_or_else(|| overflow(t))?;
                        cur = &a[0];
                    }
                    _ => break,
                }
            }
            let base = match cur {
                Term::App(g, a) if g.is_interpreted() => {
                    let (x, y) = (eval_term_with(&a[0], env)?, eval_term_with(&a[1], env)?);
                    match g.name() {
                        "+" => x.checked_add(y),
                        "-" => x.checked_sub(y),
                        _ => unreachable!("unknown interpreted symbol {g:?}"),
                    }
                    .ok_or_else(|| overflow(t))?
                }
                other => eval_term_with(other, env)?,
            };
            base.checked_add(offset).ok_or_else(|| overflow(t))
        }
        Term::App(f, _) => Err(Error::UninterpretedSymbol(f.clone())),
    }
}

/// Truth value of a variable-free constraint.
pub fn eval_ground_formula(phi: &Formula) -> Result<bool> {
    phi.eval_with(&BTreeMap::new())
}

/// Whether `phi` holds under a ground substitution. False when some
/// variable of `phi` is unbound or bound to a term that is not interpreted.
pub fn holds_under(phi: &Formula, sigma: &Substitution) -> bool {
    let mut env = BTreeMap::new();
    for x in phi.vars() {
        match sigma.get(&x) {
            Some(t) if t.is_interpreted() => match eval_ground_term(t) {
                Ok(v) => {
                    env.insert(x, v);
                }
                Err(_) => return false,
            },
            _ => return false,
        }
    }
    phi.eval_with(&env).unwrap_or(false)
}

pub(crate) fn term_to_expr(t: &Term, prefix: &str) -> Result<Expr> {
    Ok(match t {
        Term::Int(n) => Expr::Int(*n as i128),
        Term::Var(x) => Expr::var(format!("{prefix}{x}")),
        Term::App(f, _) if f.is_interpreted() && matches!(f.name(), "s" | "p") => {
            let mut offset: i128 = 0;
            let mut cur = t;
            while let Term::App(g, a) = cur {
                match g.name() {
                    "s" if g.is_interpreted() => offset += 1,
                    "p" if g.is_interpreted() => offset -= 1,
                    _ => break,
                }
                cur = &a[0];
            }
            let base = term_to_expr(cur, prefix)?;
            match (base, offset) {
                (Expr::Int(n), k) => Expr::Int(n + k),
                (b, k) if k < 0 => Expr::sub(b, Expr::Int(-k)),
                (b, k) => Expr::add(vec![b, Expr::Int(k)]),
            }
        }
        Term::App(f, args) if f.is_interpreted() => {
            let a = term_to_expr(&args[0], prefix)?;
            let b = term_to_expr(&args[1], prefix)?;
            match f.name() {
                "+" => Expr::add(vec![a, b]),
                "-" => Expr::sub(a, b),
                _ => unreachable!("unknown interpreted symbol {f:?}"),
            }
        }
        Term::App(f, _) => return Err(Error::UninterpretedSymbol(f.clone())),
    })
}

/// Outcome of a validity or satisfiability query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Truth {
    Yes,
    No,
    Undetermined,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::Yes
        } else {
            Truth::No
        }
    }
}

/// Quantifier-free LIA validity of an SMT expression over integer
/// variables: `e` is valid iff `¬e` is unsatisfiable.
pub fn expr_is_valid(e: &Expr, vars: &BTreeSet<String>, cfg: &SolverConfig) -> Result<Truth> {
    let cs = smt::ConstraintSystem::validity_query(vars.iter().cloned(), Expr::not(e.clone()));
    let verdict = smt::check(&cs, cfg)?;
    Ok(match verdict.status {
        smt::Status::Unsat => Truth::Yes,
        smt::Status::Sat => Truth::No,
        _ => Truth::Undetermined,
    })
}

fn var_names(phi: &Formula, prefix: &str) -> BTreeSet<String> {
    phi.vars().iter().map(|x| format!("{prefix}{x}")).collect()
}

/// Validity in the integer structure. Ground formulas are decided by the
/// built-in evaluator; everything else goes through the solver.
pub fn is_valid(phi: &Formula, cfg: &SolverConfig) -> Result<Truth> {
    if !phi.is_interpreted() {
        let t = phi.terms().into_iter().find(|t| !t.is_interpreted()).unwrap();
        let sym = t.symbols().into_iter().find(|s| !s.is_interpreted()).unwrap();
        return Err(Error::UninterpretedSymbol(sym));
    }
    if phi.vars().is_empty() {
        return Ok(Truth::from_bool(eval_ground_formula(phi)?));
    }
    expr_is_valid(&phi.to_expr("v_")?, &var_names(phi, "v_"), cfg)
}

pub fn is_satisfiable(phi: &Formula, cfg: &SolverConfig) -> Result<Truth> {
    Ok(match is_valid(&Formula::not(phi.clone()), cfg)? {
        Truth::Yes => Truth::No,
        Truth::No => Truth::Yes,
        Truth::Undetermined => Truth::Undetermined,
    })
}

//! Linear polynomials over term variables whose coefficients are either
//! integers or integer polynomials over unknown coefficient symbols.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::smt::{Expr, Model, Value};
use crate::term::{Symbol, Term, Var};

/// Coefficient arithmetic. Concrete coefficients use checked `i128`
/// arithmetic; symbolic ones never fail.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn from_int(n: i128) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn to_expr(&self) -> Expr;

    fn neg(&self) -> Result<Self> {
        Self::from_int(-1).mul(self)
    }
}

impl Coeff for i128 {
    fn zero() -> Self {
        0
    }

    fn from_int(n: i128) -> Self {
        n
    }

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.checked_add(*other)
            .ok_or_else(|| Error::Overflow(format!("{self} + {other}")))
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.checked_mul(*other)
            .ok_or_else(|| Error::Overflow(format!("{self} * {other}")))
    }

    fn to_expr(&self) -> Expr {
        Expr::Int(*self)
    }
}

/// A polynomial over unknowns: monomial (sorted multiset of unknown names)
/// to integer coefficient. Zero coefficients are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SymPoly(BTreeMap<Vec<Arc<str>>, i128>);

impl SymPoly {
    pub fn unknown(name: &str) -> SymPoly {
        SymPoly([(vec![Arc::from(name)], 1)].into_iter().collect())
    }

    pub fn constant(n: i128) -> SymPoly {
        let mut m = BTreeMap::new();
        if n != 0 {
            m.insert(Vec::new(), n);
        }
        SymPoly(m)
    }

    pub fn as_constant(&self) -> Option<i128> {
        match self.0.len() {
            0 => Some(0),
            1 => self.0.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&[Arc<str>], i128)> {
        self.0.iter().map(|(m, c)| (m.as_slice(), *c))
    }

    /// Value under a model; unknowns missing from the model are an error.
    pub fn eval(&self, model: &Model) -> Result<i128> {
        let mut acc: i128 = 0;
        for (mono, c) in &self.0 {
            let mut term = *c;
            for u in mono {
                let v = match model.get(&**u) {
                    Some(Value::Int(v)) => *v,
                    _ => return Err(Error::UndeclaredSymbol(u.to_string())),
                };
                term = term.mul(&v)?;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

impl fmt::Debug for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl Coeff for SymPoly {
    fn zero() -> Self {
        SymPoly::default()
    }

    fn from_int(n: i128) -> Self {
        SymPoly::constant(n)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.0.clone();
        for (m, c) in &other.0 {
            let e = out.entry(m.clone()).or_insert(0);
            *e = e.add(c)?;
            if *e == 0 {
                out.remove(m);
            }
        }
        Ok(SymPoly(out))
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        let mut out: BTreeMap<Vec<Arc<str>>, i128> = BTreeMap::new();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m = m1.clone();
                m.extend(m2.iter().cloned());
                m.sort();
                let c = c1.mul(c2)?;
                let e = out.entry(m.clone()).or_insert(0);
                *e = e.add(&c)?;
                if *e == 0 {
                    out.remove(&m);
                }
            }
        }
        Ok(SymPoly(out))
    }

    fn to_expr(&self) -> Expr {
        Expr::add(
            self.0
                .iter()
                .map(|(m, c)| {
                    let mut factors = vec![Expr::Int(*c)];
                    factors.extend(m.iter().map(|u| Expr::var(u.to_string())));
                    Expr::mul(factors)
                })
                .collect(),
        )
    }
}

/// `constant + sum(coeff * var)` over term variables. Zero coefficients are
/// never stored, so `vars` is the set of variables that really occur.
#[derive(Clone, PartialEq)]
pub struct LinearPoly<C> {
    pub constant: C,
    pub coeffs: BTreeMap<Var, C>,
}

impl<C: Coeff> LinearPoly<C> {
    pub fn zero() -> Self {
        LinearPoly {
            constant: C::zero(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: C) -> Self {
        LinearPoly {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(x: Var) -> Self {
        LinearPoly {
            constant: C::zero(),
            coeffs: [(x, C::from_int(1))].into_iter().collect(),
        }
    }

    pub fn coeff(&self, x: &Var) -> C {
        self.coeffs.get(x).cloned().unwrap_or_else(C::zero)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        for (x, c) in &other.coeffs {
            let sum = match coeffs.get(x) {
                Some(d) => d.add(c)?,
                None => c.clone(),
            };
            if sum.is_zero() {
                coeffs.remove(x);
            } else {
                coeffs.insert(x.clone(), sum);
            }
        }
        Ok(LinearPoly {
            constant: self.constant.add(&other.constant)?,
            coeffs,
        })
    }

    pub fn scale(&self, k: &C) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (x, c) in &self.coeffs {
            let p = k.mul(c)?;
            if !p.is_zero() {
                coeffs.insert(x.clone(), p);
            }
        }
        Ok(LinearPoly {
            constant: k.mul(&self.constant)?,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&C::from_int(-1))?)
    }

    pub fn offset(&self, k: i128) -> Result<Self> {
        self.add(&LinearPoly::constant(C::from_int(k)))
    }

    /// The polynomial as an SMT expression; variable `x` is rendered as
    /// `{prefix}x`.
    pub fn to_expr(&self, prefix: &str) -> Expr {
        let mut terms = vec![self.constant.to_expr()];
        for (x, c) in &self.coeffs {
            terms.push(Expr::mul(vec![c.to_expr(), Expr::var(format!("{prefix}{x}"))]));
        }
        Expr::add(terms)
    }
}

impl LinearPoly<i128> {
    pub fn eval(&self, env: &BTreeMap<Var, i128>) -> Result<i128> {
        let mut acc = self.constant;
        for (x, c) in &self.coeffs {
            let v = env.get(x).ok_or_else(|| Error::FreeVariable(x.clone()))?;
            acc = acc.add(&c.mul(v)?)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for LinearPoly<i128> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(i128, String)> = Vec::new();
        if self.constant != 0 {
            parts.push((self.constant, String::new()));
        }
        for (x, c) in &self.coeffs {
            parts.push((*c, x.to_string()));
        }
        write_signed_sum(f, &parts)
    }
}

impl<C: fmt::Debug> fmt::Debug for LinearPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + {:?}", self.constant, self.coeffs)
    }
}

fn write_signed_sum(f: &mut fmt::Formatter<'_>, parts: &[(i128, String)]) -> fmt::Result {
    if parts.is_empty() {
        return f.write_str("0");
    }
    for (i, (c, x)) in parts.iter().enumerate() {
        let mag = c.unsigned_abs();
        match (i, *c < 0) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        match (x.is_empty(), mag) {
            (true, _) => write!(f, "{mag}")?,
            (false, 1) => f.write_str(x)?,
            (false, _) => write!(f, "{mag}*{x}")?,
        }
    }
    Ok(())
}

/// Renders a coefficient vector `[b0, b1, ..]` as `b0 + b1*x1 + ..`.
pub fn format_coefficients(cs: &[i128]) -> String {
    struct Show<'a>(&'a [i128]);
    impl fmt::Display for Show<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let parts: Vec<(i128, String)> = self
                .0
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(i, c)| (*c, if i == 0 { String::new() } else { format!("x{i}") }))
                .collect();
            write_signed_sum(f, &parts)
        }
    }
    Show(cs).to_string()
}

/// Interpretation of symbols as coefficient vectors `[b0, b1, .., bn]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiAssignment<C> {
    pub polys: BTreeMap<Symbol, Vec<C>>,
}

impl<C: Coeff> Default for PiAssignment<C> {
    fn default() -> Self {
        PiAssignment {
            polys: BTreeMap::new(),
        }
    }
}

/// The result of interpreting a term: a polynomial, plus whether some
/// uninterpreted symbol without an interpretation survived.
#[derive(Clone, Debug, PartialEq)]
pub struct Applied<C> {
    pub poly: LinearPoly<C>,
    pub residual: bool,
}

impl<C: Coeff> PiAssignment<C> {
    pub fn get(&self, f: &Symbol) -> Option<&[C]> {
        self.polys.get(f).map(Vec::as_slice)
    }

    /// Interprets `t`. Arguments under a zero coefficient are not inspected.
    /// With `complete` set, an uninterpreted symbol lacking an
    /// interpretation is an error; otherwise it is reported as residual.
    pub fn apply(&self, t: &Term, complete: bool) -> Result<Applied<C>> {
        let mut residual = false;
        let poly = self.go(t, complete, &mut residual)?;
        Ok(Applied { poly, residual })
    }

    fn go(&self, t: &Term, complete: bool, residual: &mut bool) -> Result<LinearPoly<C>> {
        match t {
            Term::Var(x) => Ok(LinearPoly::var(x.clone())),
            Term::Int(n) => Ok(LinearPoly::constant(C::from_int(*n as i128))),
            Term::App(f, args) if f.is_interpreted() => {
                let a = self.go(&args[0], complete, residual)?;
                match f.name() {
                    "s" => a.offset(1),
                    "p" => a.offset(-1),
                    "+" => a.add(&self.go(&args[1], complete, residual)?),
                    "-" => a.sub(&self.go(&args[1], complete, residual)?),
                    _ => unreachable!("unknown interpreted symbol {f:?}"),
                }
            }
            Term::App(f, args) => match self.polys.get(f) {
                Some(cs) => {
                    let mut acc = LinearPoly::constant(cs[0].clone());
                    for (c, a) in cs[1..].iter().zip(args) {
                        if c.is_zero() {
                            continue;
                        }
                        acc = acc.add(&self.go(a, complete, residual)?.scale(c)?)?;
                    }
                    Ok(acc)
                }
                None if complete => Err(Error::IncompleteAssignment(f.clone())),
                None => {
                    *residual = true;
                    Ok(LinearPoly::zero())
                }
            },
        }
    }
}

impl PiAssignment<i128> {
    /// Value of a ground term, or `None` if an uninterpreted symbol without
    /// interpretation contributes to it.
    pub fn eval_ground(&self, t: &Term) -> Result<Option<i128>> {
        let applied = self.apply(t, false)?;
        if applied.residual {
            return Ok(None);
        }
        applied.poly.eval(&BTreeMap::new()).map(Some)
    }

    /// Display form, e.g. `f# = -1 - x1`.
    pub fn describe(&self) -> BTreeMap<String, String> {
        self.polys
            .iter()
            .map(|(f, cs)| (f.to_string(), format_coefficients(cs)))
            .collect()
    }
}

impl PiAssignment<SymPoly> {
    /// Instantiates every unknown from a solver model.
    pub fn instantiate(&self, model: &Model) -> Result<PiAssignment<i128>> {
        let mut polys = BTreeMap::new();
        for (f, cs) in &self.polys {
            let vals = cs.iter().map(|c| c.eval(model)).collect::<Result<Vec<_>>>()?;
            polys.insert(f.clone(), vals);
        }
        Ok(PiAssignment { polys })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(t: Term) -> Term {
        Term::app(Symbol::uninterpreted("f", 1), vec![t])
    }

    fn known_r1_model() -> PiAssignment<i128> {
        let fs = Symbol::uninterpreted("f", 1);
        PiAssignment {
            polys: [(fs.marked(), vec![-1, -1]), (fs, vec![-10, 1])].into_iter().collect(),
        }
    }

    #[test]
    fn nested_application() {
        let pi = known_r1_model();
        let t = f(f(Term::tower(11, Term::var("x")))).mark_root().unwrap();
        let got = pi.apply(&t, true).unwrap();
        assert!(!got.residual);
        assert_eq!(got.poly.to_string(), "-2 - x");
        // cross-check against direct evaluation at two points
        for x in [0i64, 50] {
            let ground = f(f(Term::tower(11, Term::Int(x)))).mark_root().unwrap();
            assert_eq!(pi.eval_ground(&ground).unwrap(), Some(-2 - x as i128));
        }
    }

    #[test]
    fn zero_coefficient_drops_argument() {
        let ack = Symbol::uninterpreted("ack", 2);
        let pi = PiAssignment::<i128> {
            polys: [(ack.marked(), vec![0, 1, 0])].into_iter().collect(),
        };
        let x = Term::var("x");
        let inner = Term::app(ack.clone(), vec![x.clone(), Term::pred(Term::var("y"))]);
        let t = Term::app(ack.marked(), vec![Term::pred(x), inner]);
        let got = pi.apply(&t, false).unwrap();
        assert!(!got.residual);
        assert_eq!(got.poly.to_string(), "-1 + x");
    }

    #[test]
    fn missing_symbol() {
        let pi = PiAssignment::<i128>::default();
        let t = f(Term::var("x"));
        assert!(pi.apply(&t, false).unwrap().residual);
        assert!(matches!(pi.apply(&t, true), Err(Error::IncompleteAssignment(_))));
        assert_eq!(pi.apply(&Term::var("x"), true).unwrap().poly.to_string(), "x");
    }

    #[test]
    fn symbolic_products() {
        let a = SymPoly::unknown("a");
        let b = SymPoly::unknown("b");
        let p = a.add(&b).unwrap().mul(&a.add(&b.neg().unwrap()).unwrap()).unwrap();
        let model: Model = [("a".into(), Value::Int(3)), ("b".into(), Value::Int(2))]
            .into_iter()
            .collect();
        assert_eq!(p.eval(&model).unwrap(), 5);
        assert!(p.add(&p.neg().unwrap()).unwrap().is_zero());
    }

    #[test]
    fn coefficient_formatting() {
        assert_eq!(format_coefficients(&[-10, 1]), "-10 + x1");
        assert_eq!(format_coefficients(&[-1, -1]), "-1 - x1");
        assert_eq!(format_coefficients(&[0, 0, 1]), "x2");
        assert_eq!(format_coefficients(&[0, 0]), "0");
        assert_eq!(format_coefficients(&[2, 3]), "2 + 3*x1");
    }
}

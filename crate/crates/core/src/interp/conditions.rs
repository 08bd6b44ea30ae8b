//! Side conditions of the PI processors as a quantified constraint system
//! over unknown coefficients.

use std::collections::BTreeSet;

use serde::Serialize;

use super::poly::{Coeff, LinearPoly, PiAssignment, SymPoly};
use super::{check_subtraction_condition, reducible_positions, uninterpreted_positions, Mode, SignScope};
use crate::dp::DpProblem;
use crate::error::Result;
use crate::smt::{CmpOp, ConstraintSystem, Expr, Logic};
use crate::term::Symbol;

/// Prefix of term variables inside generated formulas. Unknown names never
/// start with it.
pub(crate) const VAR_PREFIX: &str = "v.";
pub(crate) const C0: &str = "c0";

/// Boolean unknowns selecting which pairs must be strict, bounded and (in
/// legacy mode) filtered.
#[derive(Clone, Debug, Serialize)]
pub struct PairGuards {
    pub id: usize,
    pub strict: String,
    pub bound: String,
    pub filter: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConditionStats {
    pub int_unknowns: usize,
    pub bool_unknowns: usize,
    pub rule_conditions: usize,
    pub weak_pair_conditions: usize,
    pub quantified_assertions: usize,
}

#[derive(Clone, Debug)]
pub struct Conditions {
    pub system: ConstraintSystem,
    pub template: PiAssignment<SymPoly>,
    pub guards: Vec<PairGuards>,
    pub stats: ConditionStats,
}

#[derive(Clone, Debug)]
pub enum Built {
    Ready(Box<Conditions>),
    /// No interpretation can make progress; no solver call is needed.
    Infeasible(String),
}

fn unknown_name(f: &Symbol, i: usize) -> String {
    format!("c.{f}.{i}")
}

/// Coefficients `[b0, .., bn]` as fresh unknowns, except positions listed in
/// `zero`, which are fixed to 0.
fn template_for(f: &Symbol, zero: &BTreeSet<usize>, cs: &mut ConstraintSystem) -> Vec<SymPoly> {
    (0..=f.arity())
        .map(|i| {
            if i > 0 && zero.contains(&i) {
                SymPoly::zero()
            } else {
                let name = unknown_name(f, i);
                cs.declare_int(name.clone());
                SymPoly::unknown(&name)
            }
        })
        .collect()
}

/// Wraps `body` in a universal binder over the term variables it mentions.
fn quantified(body: Expr) -> Expr {
    let (ints, _) = body.free_symbols();
    let vars = ints.into_iter().filter(|v| v.starts_with(VAR_PREFIX)).collect();
    Expr::forall(vars, body)
}

fn poly_expr(p: &LinearPoly<SymPoly>) -> Expr {
    p.to_expr(VAR_PREFIX)
}

fn ne_zero(c: &SymPoly) -> Expr {
    Expr::not(Expr::eq(c.to_expr(), Expr::Int(0)))
}

/// Generates the side conditions of the processor selected by `mode` for
/// problem `p`.
pub fn build_conditions(
    p: &DpProblem,
    mode: Mode,
    sign_scope: SignScope,
    coefficient_bound: Option<u64>,
) -> Result<Built> {
    if p.pairs.is_empty() {
        return Ok(Built::Infeasible("no pairs".into()));
    }
    if let Mode::Variant(_) = mode {
        let violations = check_subtraction_condition(&p.system, &p.pairs);
        if let Some(v) = violations.first() {
            return Ok(Built::Infeasible(format!(
                "subtrahend may be rewritten by an uninterpreted rule: {v}"
            )));
        }
    }
    let label = match mode {
        Mode::Legacy => "legacy".to_string(),
        Mode::Variant(v) => v.name().to_string(),
    };
    let mut cs = ConstraintSystem::new(Logic::Nia, label);
    let mut stats = ConditionStats::default();
    let c0 = cs.declare_int(C0);

    let mut template = PiAssignment::<SymPoly>::default();
    let forced_zero = match mode {
        Mode::Legacy => uninterpreted_positions(&p.pairs),
        Mode::Variant(_) => Default::default(),
    };
    let none = BTreeSet::new();
    for f in p.system.defined_symbols() {
        let m = f.marked();
        let zero = forced_zero.get(&m).unwrap_or(&none);
        let t = template_for(&m, zero, &mut cs);
        template.polys.insert(m, t);
    }
    if let Mode::Variant(v) = mode {
        for f in p.system.uninterpreted_symbols() {
            let t = template_for(&f, &none, &mut cs);
            // monotonicity of uninterpreted symbols
            for b in &t[1..] {
                cs.assert(Expr::ge(b.to_expr(), Expr::Int(0)));
            }
            template.polys.insert(f, t);
        }
        let reducible = reducible_positions(&p.pairs);
        for (m, coeffs) in template.polys.iter().filter(|(m, _)| m.is_marked()) {
            let positions: Vec<usize> = match sign_scope {
                SignScope::AllPositions => (1..=m.arity()).collect(),
                SignScope::Reducible => reducible.get(m).into_iter().flatten().copied().collect(),
            };
            for i in positions {
                cs.assert(Expr::cmp(v.sign(), coeffs[i].to_expr(), Expr::Int(0)));
            }
        }
    }
    if let Some(bound) = coefficient_bound {
        let b = bound as i128;
        for u in cs.int_unknowns.clone() {
            if u != C0 {
                cs.assert(Expr::ge(Expr::var(u.clone()), Expr::Int(-b)));
                cs.assert(Expr::ge(Expr::Int(b), Expr::var(u)));
            }
        }
    }

    if let Mode::Variant(v) = mode {
        for rule in &p.system.rules {
            let l = template.apply(&rule.lhs, true)?.poly;
            let r = template.apply(&rule.rhs, true)?.poly;
            let phi = rule.constraint.to_expr(VAR_PREFIX)?;
            let body = Expr::implies(phi, Expr::cmp(v.rules(), poly_expr(&l.sub(&r)?), Expr::Int(0)));
            cs.assert(quantified(body));
            stats.rule_conditions += 1;
        }
    }

    let mut guards = Vec::new();
    let mut any_difference = false;
    for pair in &p.pairs {
        let complete = matches!(mode, Mode::Variant(_));
        let s = template.apply(&pair.lhs, complete)?;
        let t = template.apply(&pair.rhs, complete)?;
        if s.residual || t.residual {
            return Ok(Built::Infeasible(format!(
                "pair {} keeps an uninterpreted symbol after interpretation",
                pair.id
            )));
        }
        let (s, t) = (s.poly, t.poly);
        let diff = s.sub(&t)?;
        any_difference |= !diff.is_zero();
        let phi = pair.constraint.to_expr(VAR_PREFIX)?;
        let cvars = pair.constraint.vars();
        let (weak, strict) = match mode {
            Mode::Legacy => (CmpOp::Ge, CmpOp::Gt),
            Mode::Variant(v) => (v.weak(), v.strict()),
        };
        let g = PairGuards {
            id: pair.id,
            strict: format!("strict.{}", pair.id),
            bound: format!("bound.{}", pair.id),
            filter: matches!(mode, Mode::Legacy).then(|| format!("filter.{}", pair.id)),
        };
        let strict_g = cs.declare_bool(g.strict.clone());
        let bound_g = cs.declare_bool(g.bound.clone());

        if mode == Mode::Legacy {
            // variables of Pol(t#) outside the constraint must survive in Pol(s#)
            for (x, c) in &t.coeffs {
                if !cvars.contains(x) {
                    let d = s.coeff(x);
                    cs.assert(Expr::or(vec![Expr::not(ne_zero(c)), ne_zero(&d)]));
                }
            }
        }

        let d = poly_expr(&diff);
        cs.assert(quantified(Expr::implies(phi.clone(), Expr::cmp(weak, d.clone(), Expr::Int(0)))));
        stats.weak_pair_conditions += 1;
        cs.assert(quantified(Expr::implies(
            Expr::and(vec![strict_g, phi.clone()]),
            Expr::cmp(strict, d, Expr::Int(0)),
        )));
        cs.assert(quantified(Expr::implies(
            Expr::and(vec![bound_g, phi]),
            Expr::cmp(weak, poly_expr(&s), c0.clone()),
        )));
        if let Some(name) = &g.filter {
            let filter_g = cs.declare_bool(name.clone());
            let outside: Vec<Expr> = s
                .coeffs
                .iter()
                .filter(|(x, _)| !cvars.contains(*x))
                .map(|(_, c)| Expr::eq(c.to_expr(), Expr::Int(0)))
                .collect();
            cs.assert(Expr::implies(filter_g, Expr::and(outside)));
        }
        guards.push(g);
    }
    if !any_difference {
        return Ok(Built::Infeasible(
            "every pair is interpreted identically on both sides, so none can be strict".into(),
        ));
    }

    cs.assert(Expr::or(guards.iter().map(|g| Expr::bool_var(g.strict.clone())).collect()));
    cs.assert(Expr::or(guards.iter().map(|g| Expr::bool_var(g.bound.clone())).collect()));
    if mode == Mode::Legacy {
        cs.assert(Expr::or(
            guards.iter().filter_map(|g| g.filter.clone()).map(Expr::bool_var).collect(),
        ));
    }

    stats.int_unknowns = cs.int_unknowns.len();
    stats.bool_unknowns = cs.bool_unknowns.len();
    stats.quantified_assertions = cs.quantified_assertions();
    Ok(Built::Ready(Box::new(Conditions {
        system: cs,
        template,
        guards,
        stats,
    })))
}


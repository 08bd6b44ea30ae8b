//! Checks a concrete interpretation against a processor's side conditions and
//! classifies the pairs by per-pair validity.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::conditions::VAR_PREFIX;
use super::poly::{LinearPoly, PiAssignment};
use super::{check_subtraction_condition, reducible_positions, Mode, SignScope};
use crate::dp::DpProblem;
use crate::error::Result;
use crate::lia::{self, Formula, Truth};
use crate::smt::{CmpOp, Expr, GridEvaluator, Model, SolverConfig};

/// Pairs removable under an accepted interpretation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// Pairs whose instances move strictly in the chain direction.
    pub strict: BTreeSet<usize>,
    /// Pairs whose left-hand side is bounded by `c0`.
    pub bounded: BTreeSet<usize>,
    /// Legacy only: pairs whose interpreted left-hand side uses constraint
    /// variables only.
    pub filter: Option<BTreeSet<usize>>,
    /// Present iff `bounded` is nonempty.
    pub c0: Option<i128>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verification {
    Accepted(Classification),
    Rejected {
        condition: String,
        /// The solver could not decide a validity check.
        undetermined: bool,
    },
}

impl Verification {
    fn reject(condition: impl Into<String>) -> Verification {
        Verification::Rejected {
            condition: condition.into(),
            undetermined: false,
        }
    }
}

/// Validity of a formula over term variables only.
fn valid(e: Expr, cfg: &SolverConfig) -> Result<Truth> {
    let (ints, bools) = e.free_symbols();
    if ints.is_empty() && bools.is_empty() {
        let empty = Model::new();
        return Ok(Truth::from_bool(GridEvaluator::new(&empty, 0..=0).holds(&e)?));
    }
    lia::expr_is_valid(&e, &ints, cfg)
}

fn implication(phi: &Formula, op: CmpOp, lhs: &LinearPoly<i128>, rhs: Expr) -> Result<Expr> {
    Ok(Expr::implies(
        phi.to_expr(VAR_PREFIX)?,
        Expr::cmp(op, lhs.to_expr(VAR_PREFIX), rhs),
    ))
}

enum Check {
    Holds,
    Fails(Verification),
}

fn require(truth: Truth, what: impl FnOnce() -> String) -> Check {
    match truth {
        Truth::Yes => Check::Holds,
        Truth::No => Check::Fails(Verification::reject(what())),
        Truth::Undetermined => Check::Fails(Verification::Rejected {
            condition: what(),
            undetermined: true,
        }),
    }
}

macro_rules! ensure {
    ($check:expr) => {
        if let Check::Fails(v) = $check {
            return Ok(v);
        }
    };
}

/// Membership test for a classification set; an undetermined check
/// rejects the whole model.
macro_rules! member {
    ($e:expr, $pair:expr, $cfg:expr) => {
        match valid($e, $cfg)? {
            Truth::Yes => true,
            Truth::No => false,
            Truth::Undetermined => {
                return Ok(Verification::Rejected {
                    condition: format!("classification of pair {}", $pair),
                    undetermined: true,
                })
            }
        }
    };
}

/// Checks every global side condition of `mode` for the concrete `pi` and
/// bound `c0`, then computes the maximal strict/bounded(/filter) sets.
pub fn verify_model(
    p: &DpProblem,
    mode: Mode,
    pi: &PiAssignment<i128>,
    c0: i128,
    sign_scope: SignScope,
    cfg: &SolverConfig,
) -> Result<Verification> {
    match mode {
        Mode::Variant(v) => {
            if let Some(violation) = check_subtraction_condition(&p.system, &p.pairs).first() {
                return Ok(Verification::reject(format!(
                    "subtrahend outside interpreted terms ({violation})"
                )));
            }
            for f in p.system.uninterpreted_symbols() {
                let cs = pi.get(&f).ok_or_else(|| crate::Error::IncompleteAssignment(f.clone()))?;
                if let Some(i) = (1..cs.len()).find(|&i| cs[i] < 0) {
                    return Ok(Verification::reject(format!(
                        "coefficient {i} of {f} is negative, so {f} is not monotone"
                    )));
                }
            }
            let reducible = reducible_positions(&p.pairs);
            for (m, cs) in pi.polys.iter().filter(|(m, _)| m.is_marked()) {
                let positions: Vec<usize> = match sign_scope {
                    SignScope::AllPositions => (1..=m.arity()).collect(),
                    SignScope::Reducible => reducible.get(m).into_iter().flatten().copied().collect(),
                };
                if let Some(i) = positions.into_iter().find(|&i| !v.sign().holds(cs[i], 0)) {
                    return Ok(Verification::reject(format!(
                        "coefficient {i} of {m} has the wrong sign for {}",
                        v.tuple()
                    )));
                }
            }
            for (k, rule) in p.system.rules.iter().enumerate() {
                let l = pi.apply(&rule.lhs, true)?.poly;
                let r = pi.apply(&rule.rhs, true)?.poly;
                let e = implication(&rule.constraint, v.rules(), &l.sub(&r)?, Expr::Int(0))?;
                ensure!(require(valid(e, cfg)?, || format!(
                    "rule {} is not compatible: {rule}",
                    k + 1
                )));
            }
            let mut strict = BTreeSet::new();
            let mut bounded = BTreeSet::new();
            for pair in &p.pairs {
                let s = pi.apply(&pair.lhs, true)?.poly;
                let t = pi.apply(&pair.rhs, true)?.poly;
                let d = s.sub(&t)?;
                let weak = implication(&pair.constraint, v.weak(), &d, Expr::Int(0))?;
                ensure!(require(valid(weak, cfg)?, || format!(
                    "pair {} is not weakly oriented",
                    pair.id
                )));
                if member!(implication(&pair.constraint, v.strict(), &d, Expr::Int(0))?, pair.id, cfg) {
                    strict.insert(pair.id);
                }
                if member!(implication(&pair.constraint, v.weak(), &s, Expr::Int(c0))?, pair.id, cfg) {
                    bounded.insert(pair.id);
                }
            }
            Ok(accepted(strict, bounded, None, c0))
        }
        Mode::Legacy => {
            let marked = PiAssignment {
                polys: pi
                    .polys
                    .iter()
                    .filter(|(f, _)| f.is_marked())
                    .map(|(f, cs)| (f.clone(), cs.clone()))
                    .collect::<BTreeMap<_, _>>(),
            };
            let mut strict = BTreeSet::new();
            let mut bounded = BTreeSet::new();
            let mut filter = BTreeSet::new();
            for pair in &p.pairs {
                let s = marked.apply(&pair.lhs, false)?;
                let t = marked.apply(&pair.rhs, false)?;
                if s.residual || t.residual {
                    return Ok(Verification::reject(format!(
                        "pair {} keeps an uninterpreted symbol after interpretation",
                        pair.id
                    )));
                }
                let (s, t) = (s.poly, t.poly);
                let cvars = pair.constraint.vars();
                if let Some(x) = t.vars().find(|x| !cvars.contains(*x) && s.coeff(x) == 0) {
                    return Ok(Verification::reject(format!(
                        "pair {}: variable {x} of the interpreted right-hand side occurs neither in the constraint nor in the interpreted left-hand side",
                        pair.id
                    )));
                }
                let d = s.sub(&t)?;
                let weak = implication(&pair.constraint, CmpOp::Ge, &d, Expr::Int(0))?;
                ensure!(require(valid(weak, cfg)?, || format!(
                    "pair {} is not weakly decreasing",
                    pair.id
                )));
                if member!(implication(&pair.constraint, CmpOp::Gt, &d, Expr::Int(0))?, pair.id, cfg) {
                    strict.insert(pair.id);
                }
                if member!(implication(&pair.constraint, CmpOp::Ge, &s, Expr::Int(c0))?, pair.id, cfg) {
                    bounded.insert(pair.id);
                }
                if s.vars().all(|x| cvars.contains(x)) {
                    filter.insert(pair.id);
                }
            }
            Ok(accepted(strict, bounded, Some(filter), c0))
        }
    }
}

fn accepted(
    strict: BTreeSet<usize>,
    bounded: BTreeSet<usize>,
    filter: Option<BTreeSet<usize>>,
    c0: i128,
) -> Verification {
    let c0 = (!bounded.is_empty()).then_some(c0);
    Verification::Accepted(Classification {
        strict,
        bounded,
        filter,
        c0,
    })
}

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use ctrs_core::lia::{
    eval_ground_formula, eval_ground_term, expr_is_valid, is_satisfiable, is_valid, Comparison, Formula, Truth,
};
use ctrs_core::syntax::parse_ctrs;
use ctrs_core::term::{Symbol, Term, Var};
use proptest::prelude::*;

/// Parses a constraint by wrapping it in a rule over `x`, `y`.
fn formula(text: &str) -> Formula {
    let doc = parse_ctrs(&format!("SIG h/2\nh(x, y) -> h(x, y) [{text}]\n")).unwrap();
    doc.rules[0].constraint.clone()
}

fn ground(text: &str) -> Term {
    let doc = parse_ctrs(&format!("SIG h/1\nh(0) -> {text}\n")).unwrap();
    doc.rules[0].rhs.clone()
}

#[test]
fn ground_terms_evaluate() {
    assert_eq!(eval_ground_term(&s(s(Term::Int(0)))).unwrap(), 2);
    assert_eq!(eval_ground_term(&s(p(p(s(Term::Int(0)))))).unwrap(), 0);
    assert_eq!(eval_ground_term(&Term::Int(0)).unwrap(), 0);
    assert_eq!(eval_ground_term(&ground("3 - s(4) + p(0)")).unwrap(), -3);
}

#[test]
fn evaluation_rejects_uninterpreted_symbols_and_variables() {
    assert!(eval_ground_term(&f(Term::Int(0))).is_err());
    assert!(eval_ground_term(&s(x())).is_err());
    assert!(eval_ground_formula(&formula("x > 0")).is_err());
}

#[test]
fn ground_formulas_evaluate() {
    let gt = |a: i64, b: i64| Formula::atom(Comparison::Gt, Term::numeral(a), Term::numeral(b));
    assert!(eval_ground_formula(&gt(101, 100)).unwrap());
    assert!(eval_ground_formula(&Formula::not(gt(101, 101))).unwrap());
    let eq = Formula::atom(Comparison::Eq, Term::Int(0), p(s(Term::Int(0))));
    assert!(eval_ground_formula(&eq).unwrap());
}

#[test]
fn sugar_normalizes_to_eq_gt_ge() {
    let env: BTreeMap<Var, i64> = [(Var::new("x"), 3), (Var::new("y"), 3)].into();
    for (text, expected) in [("x < y", false), ("x <= y", true), ("x != y", false), ("!(x = y) \\/ x >= y", true)] {
        assert_eq!(formula(text).eval_with(&env).unwrap(), expected, "{text}");
    }
    assert_eq!(formula("x < y"), formula("y > x"));
}

#[test]
fn validity_examples() {
    let cfg = solver();
    assert_eq!(is_valid(&formula("101 > x => -1 - x >= -2 - x"), &cfg).unwrap(), Truth::Yes);
    assert_eq!(is_valid(&formula("!(101 > x) => x - 10 >= x - 9"), &cfg).unwrap(), Truth::No);
    assert_eq!(is_valid(&formula("x = x"), &cfg).unwrap(), Truth::Yes);
}

#[test]
fn satisfiability_examples() {
    let cfg = solver();
    assert_eq!(is_satisfiable(&formula("x > 0 /\\ y = 0"), &cfg).unwrap(), Truth::Yes);
    assert_eq!(is_satisfiable(&formula("x > 0 /\\ 0 > x"), &cfg).unwrap(), Truth::No);
    assert_eq!(is_satisfiable(&Formula::True, &cfg).unwrap(), Truth::Yes);
}

#[test]
fn validity_rejects_uninterpreted_constraints() {
    let bad = Formula::atom(Comparison::Eq, f(x()), x());
    assert!(is_valid(&bad, &solver()).is_err());
}

fn interpreted_ground() -> impl Strategy<Value = Term> {
    let leaf = (-30i64..30).prop_map(Term::Int);
    leaf.prop_recursive(5, 30, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(s),
            inner.clone().prop_map(p),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(Symbol::plus(), vec![a, b])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app(Symbol::minus(), vec![a, b])),
        ]
    })
}

fn small_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y"]).prop_map(Term::var),
        (-3i64..4).prop_map(Term::Int),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(s),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app(Symbol::minus(), vec![a, b])),
        ]
    })
}

fn small_formula() -> impl Strategy<Value = Formula> {
    let cmp = prop::sample::select(vec![Comparison::Eq, Comparison::Gt, Comparison::Ge, Comparison::Le]);
    let atom = (cmp, small_term(), small_term()).prop_map(|(c, a, b)| Formula::atom(c, a, b));
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

fn grid_values(phi: &Formula) -> Vec<bool> {
    let mut out = Vec::new();
    for a in -8..=8 {
        for b in -8..=8 {
            let env: BTreeMap<Var, i64> = [(Var::new("x"), a), (Var::new("y"), b)].into();
            out.push(phi.eval_with(&env).unwrap());
        }
    }
    out
}

proptest! {
    #[test]
    fn succ_and_pred_shift_by_one(t in interpreted_ground()) {
        let v = eval_ground_term(&t).unwrap();
        prop_assert_eq!(eval_ground_term(&s(t.clone())).unwrap(), v + 1);
        prop_assert_eq!(eval_ground_term(&p(t)).unwrap(), v - 1);
    }

    #[test]
    fn ground_validity_agrees_with_the_solver(a in interpreted_ground(), b in interpreted_ground()) {
        let phi = Formula::atom(Comparison::Ge, a, b);
        let by_eval = eval_ground_formula(&phi).unwrap();
        prop_assert_eq!(is_valid(&phi, &solver()).unwrap(), Truth::from_bool(by_eval));
        let by_solver = expr_is_valid(&phi.to_expr("v_").unwrap(), &BTreeSet::new(), &solver()).unwrap();
        prop_assert_eq!(by_solver, Truth::from_bool(by_eval));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn validity_is_dual_to_satisfiability(phi in small_formula()) {
        let cfg = solver();
        let valid = is_valid(&phi, &cfg).unwrap();
        let neg_sat = is_satisfiable(&Formula::not(phi.clone()), &cfg).unwrap();
        prop_assert_ne!(valid, Truth::Undetermined);
        prop_assert_eq!(valid == Truth::Yes, neg_sat == Truth::No);
        // an independent grid oracle can refute validity and witness satisfiability
        let grid = grid_values(&phi);
        if grid.iter().any(|b| !b) {
            prop_assert_eq!(valid, Truth::No);
        }
        if grid.iter().any(|b| *b) {
            prop_assert_eq!(is_satisfiable(&phi, &cfg).unwrap(), Truth::Yes);
        }
    }
}

mod common;

use common::*;
use ctrs_core::lia::{Comparison, Formula};
use ctrs_core::rules::ConstrainedRule;
use ctrs_core::syntax::{parse_ctrs, CtrsDocument};
use ctrs_core::term::{Symbol, Term};
use ctrs_core::Error;
use proptest::prelude::*;

#[test]
fn corpus_fixtures_round_trip() {
    for name in SYSTEMS {
        let doc = parse_ctrs(&corpus_source(name)).unwrap();
        let printed = doc.to_string();
        let again = parse_ctrs(&printed).unwrap();
        assert_eq!(doc, again, "{name}");
        assert_eq!(printed, again.to_string(), "{name}");
    }
}

#[test]
fn mccarthy_source_declares_one_symbol() {
    let doc = parse_ctrs(&corpus_source("R1")).unwrap();
    assert_eq!(doc.rules.len(), 4);
    assert_eq!(doc.signature, vec![Symbol::uninterpreted("f", 1)]);
    assert_eq!(doc.spans.len(), 4);
}

#[test]
fn diagnostics_carry_locations() {
    let cases = [
        ("SIG f/1\nf(x) -> f(y)\n", 2),
        ("SIG f/1\n\nf(x) -> g(x)\n", 3),
        ("SIG f/1\nf(x, y) -> x\n", 2),
        ("SIG f/1\nf#(x) -> x\n", 2),
        ("SIG f/1\nf(x) -> x [x >]\n", 2),
        ("SIG f/1 f/2\n", 1),
    ];
    for (text, line) in cases {
        match parse_ctrs(text) {
            Err(Error::Parse { line: l, col, msg }) => {
                assert_eq!(l, line, "{text:?}: {msg}");
                assert!(col >= 1);
            }
            other => panic!("{text:?} gave {other:?}"),
        }
    }
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let doc = parse_ctrs("; header\n\nSIG f/1 ; trailing\nf(x) -> x ; done\n").unwrap();
    assert_eq!(doc.rules.len(), 1);
    assert_eq!(doc.rules[0].constraint, Formula::True);
}

fn term_over(vars: Vec<&'static str>) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vars).prop_map(Term::var),
        (-9i64..10).prop_map(Term::Int),
        Just(Term::app(Symbol::uninterpreted("c", 0), vec![])),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app(Symbol::uninterpreted("f", 1), vec![t])),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Term::app(Symbol::uninterpreted("g", 2), vec![a, b])),
            ((0i64..4), inner.clone()).prop_map(|(n, t)| Term::tower(n, t)),
            inner.clone().prop_map(Term::pred),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(Symbol::plus(), vec![a, b])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app(Symbol::minus(), vec![a, b])),
        ]
    })
}

fn arith_over(vars: Vec<&'static str>) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![prop::sample::select(vars).prop_map(Term::var), (-9i64..10).prop_map(Term::Int)];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::succ),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app(Symbol::minus(), vec![a, b])),
        ]
    })
}

fn formula_over(vars: Vec<&'static str>) -> impl Strategy<Value = Formula> {
    let cmp = prop::sample::select(vec![
        Comparison::Eq,
        Comparison::Ne,
        Comparison::Gt,
        Comparison::Ge,
        Comparison::Lt,
        Comparison::Le,
    ]);
    let atom = prop_oneof![
        (cmp, arith_over(vars.clone()), arith_over(vars)).prop_map(|(c, a, b)| Formula::atom(c, a, b)),
        Just(Formula::True),
        Just(Formula::False),
    ];
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

fn rule() -> impl Strategy<Value = ConstrainedRule> {
    let lhs = Term::app(Symbol::uninterpreted("g", 2), vec![Term::var("x"), Term::var("y")]);
    (term_over(vec!["x", "y"]), formula_over(vec!["x", "y"]))
        .prop_map(move |(rhs, phi)| ConstrainedRule::new(lhs.clone(), rhs, phi))
}

proptest! {
    #[test]
    fn printed_documents_parse_back(rules in prop::collection::vec(rule(), 1..5)) {
        let doc = CtrsDocument {
            signature: vec![
                Symbol::uninterpreted("f", 1),
                Symbol::uninterpreted("g", 2),
                Symbol::uninterpreted("c", 0),
            ],
            rules,
            spans: Vec::new(),
        };
        let text = doc.to_string();
        let parsed = parse_ctrs(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(parsed, doc);
    }
}

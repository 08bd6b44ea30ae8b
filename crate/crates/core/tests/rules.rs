mod common;

use std::collections::BTreeSet;

use common::*;
use ctrs_core::lia::{eval_ground_term, Formula};
use ctrs_core::rules::{
    check_local_soundness, check_rule_wellformed, compute_dependency_pairs, normalize, rewrite_step, ConstrainedRule,
    Normalization, SoundnessIssue, Trs, Violation,
};
use ctrs_core::term::{Position, Symbol, Term, Var};
use proptest::prelude::*;

fn shapes(name: &str) -> Vec<String> {
    compute_dependency_pairs(&system(name)).iter().map(|p| p.shape()).collect()
}

fn golden(name: &str) -> Vec<String> {
    let path = corpus_dir().join(format!("golden/{name}.dp"));
    std::fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn wellformedness_examples() {
    let rule = &parse_rules("SIG f/1\nf(x) -> f(f(s^11(x))) [s^101(0) > x]\n")[0];
    assert!(check_rule_wellformed(rule).is_empty());

    let escaped = ConstrainedRule::new(f(x()), f(Term::var("y")), Formula::True);
    assert_eq!(check_rule_wellformed(&escaped), vec![Violation::EscapedVariables(vec![Var::new("y")])]);

    let var_lhs = ConstrainedRule::new(x(), Term::Int(0), Formula::True);
    assert_eq!(check_rule_wellformed(&var_lhs), vec![Violation::VariableLhs]);

    let bad_constraint = ConstrainedRule::new(
        f(x()),
        x(),
        Formula::atom(ctrs_core::lia::Comparison::Eq, f(x()), x()),
    );
    assert_eq!(check_rule_wellformed(&bad_constraint), vec![Violation::UninterpretedInConstraint]);
}

fn parse_rules(text: &str) -> Vec<ConstrainedRule> {
    ctrs_core::syntax::parse_ctrs(text).unwrap().rules
}

#[test]
fn local_soundness_examples() {
    let cfg = solver();
    let r0 = system_from("s(p(x)) -> x\np(s(x)) -> x\n");
    assert!(check_local_soundness(&r0, &cfg).unwrap().is_empty());

    let bad = system_from("s(x) -> 0\n");
    assert_eq!(check_local_soundness(&bad, &cfg).unwrap(), vec![SoundnessIssue::NotValid { rule: 0 }]);

    // rules rooted by f pass without a check
    assert!(check_local_soundness(&system("R1"), &cfg).unwrap().is_empty());
    for name in SYSTEMS {
        assert!(check_local_soundness(&system(name), &cfg).unwrap().is_empty(), "{name}");
    }
}

#[test]
fn mixing_uninterpreted_symbols_into_interpreted_rules_is_unsound() {
    let bad = system_from("SIG f/1\ns(x) -> f(x)\n");
    assert_eq!(
        check_local_soundness(&bad, &solver()).unwrap(),
        vec![SoundnessIssue::NotInterpreted { rule: 0 }]
    );
}

#[test]
fn rewrite_step_examples() {
    let r1 = system("R1");
    let steps = rewrite_step(&r1, &f(Term::numeral(100)));
    assert!(steps
        .iter()
        .any(|st| st.rule == 0 && st.position.is_root() && st.term == f(f(Term::numeral(111)))));
    // 101 > 100 holds, so the second rule does not apply at the root
    assert!(!steps.iter().any(|st| st.rule == 1 && st.position.is_root()));

    let steps = rewrite_step(&r1, &f(Term::numeral(101)));
    assert!(!steps.iter().any(|st| st.rule == 0 && st.position.is_root()));
    assert!(steps
        .iter()
        .any(|st| st.rule == 1 && st.position.is_root() && st.term == Term::tower(-10, Term::numeral(101))));

    let r0 = system_from("s(p(x)) -> x\np(s(x)) -> x\n");
    let steps = rewrite_step(&r0, &s(p(Term::Int(0))));
    assert_eq!(steps.len(), 1);
    assert_eq!((steps[0].term.clone(), steps[0].position.clone(), steps[0].rule), (Term::Int(0), Position::root(), 0));
}

#[test]
fn constraint_variables_must_be_instantiated_by_interpreted_terms() {
    let trs = system_from("SIG f/1 g/1\nf(x) -> 0 [x > 0]\n");
    let g1 = Term::app(Symbol::uninterpreted("g", 1), vec![Term::Int(1)]);
    assert!(rewrite_step(&trs, &f(g1)).is_empty());
    assert_eq!(rewrite_step(&trs, &f(Term::Int(1))).len(), 1);
}

#[test]
fn r1_pairs_match_the_listing() {
    let pairs = compute_dependency_pairs(&system("R1"));
    assert_eq!(pairs.len(), 23);
    let c = "[s^101(0) > x]";
    let n = "[!(s^101(0) > x)]";
    let mut expected: BTreeSet<String> = BTreeSet::new();
    expected.insert(format!("f#(x) -> f#(f(s^11(x))) {c}"));
    expected.insert(format!("f#(x) -> f#(s^11(x)) {c}"));
    for i in 0..=10 {
        expected.insert(format!("f#(x) -> s#({}) {c}", Term::tower(i, x())));
    }
    for i in 0..=9 {
        expected.insert(format!("f#(x) -> p#({}) {n}", Term::tower(-i, x())));
    }
    let got: BTreeSet<String> = pairs.iter().map(|p| p.shape()).collect();
    assert_eq!(got, expected);
    // the two recursive pairs come first
    assert_eq!(pairs[0].shape(), format!("f#(x) -> f#(f(s^11(x))) {c}"));
    assert_eq!(pairs[1].shape(), format!("f#(x) -> f#(s^11(x)) {c}"));
}

#[test]
fn r2_pairs_match_the_listing() {
    let got = shapes("R2");
    let zero = "[x = 0 /\\ y >= 0]";
    let base = "[x > 0 /\\ y = 0]";
    let rec = "[x > 0 /\\ y > 0]";
    let expected = vec![
        format!("ack#(x, y) -> s#(y) {zero}"),
        format!("ack#(x, y) -> ack#(p(x), s(0)) {base}"),
        format!("ack#(x, y) -> p#(x) {base}"),
        format!("ack#(x, y) -> s#(0) {base}"),
        format!("ack#(x, y) -> ack#(p(x), ack(x, p(y))) {rec}"),
        format!("ack#(x, y) -> p#(x) {rec}"),
        format!("ack#(x, y) -> ack#(x, p(y)) {rec}"),
        format!("ack#(x, y) -> p#(y) {rec}"),
    ];
    assert_eq!(got, expected);
}

#[test]
fn pairs_match_golden_fixtures() {
    for name in SYSTEMS {
        assert_eq!(shapes(name), golden(name), "{name}");
    }
}

#[test]
fn pair_ids_are_dense_and_roots_are_marked_defined_symbols() {
    for name in SYSTEMS {
        let trs = system(name);
        let defined = trs.defined_symbols();
        let pairs = compute_dependency_pairs(&trs);
        for (i, pair) in pairs.iter().enumerate() {
            assert_eq!(pair.id, i + 1);
            for root in [pair.lhs_root(), pair.rhs_root()] {
                assert!(root.is_marked());
                assert!(defined.contains(&root.unmarked()), "{name}: {pair}");
            }
            let lhs_vars = pair.lhs.vars();
            assert!(pair.rhs.vars().is_subset(&lhs_vars));
            assert!(pair.constraint.vars().is_subset(&lhs_vars));
        }
    }
}

#[test]
fn variable_right_hand_sides_give_no_pairs() {
    let r0 = system_from("s(p(x)) -> x\np(s(x)) -> x\n");
    assert!(compute_dependency_pairs(&r0).is_empty());
}

fn mccarthy(n: i64, budget: usize) -> (Term, Vec<(Position, usize)>) {
    match normalize(&system("R1"), &f(Term::Int(n)), budget) {
        Normalization::Normal { term, trace } => (term, trace),
        Normalization::BudgetExhausted { steps, .. } => panic!("f({n}) not normal after {steps} steps"),
    }
}

#[test]
fn mccarthy_witness_path_reaches_91() {
    let trs = system("R1");
    let start = f(Term::numeral(100));
    let Normalization::Normal { term, trace } = normalize(&trs, &start, 10_000) else {
        panic!("budget exhausted");
    };
    assert!(term.is_interpreted());
    assert_eq!(eval_ground_term(&term).unwrap(), 91);
    assert_eq!(term, Term::numeral(91));
    // replay the trace through the one-step relation
    let mut cur = start;
    for (pos, rule) in trace {
        let next = rewrite_step(&trs, &cur)
            .into_iter()
            .find(|st| st.position == pos && st.rule == rule)
            .expect("every traced step is a rewrite step");
        cur = next.term;
    }
    assert_eq!(cur, term);
}

#[test]
fn mccarthy_sweep() {
    for n in -20..=120 {
        let (term, _) = mccarthy(n, 10_000);
        let expected = if n <= 101 { 91 } else { n - 10 };
        assert_eq!(eval_ground_term(&term).unwrap(), expected, "f({n})");
    }
}

#[test]
fn step_budget_is_reported() {
    let looping = system_from("SIG f/1\nf(x) -> f(s(x))\n");
    assert!(matches!(
        normalize(&looping, &f(Term::Int(0)), 50),
        Normalization::BudgetExhausted { steps: 50, .. }
    ));
}

fn interpreted_ground() -> impl Strategy<Value = Term> {
    let leaf = (-10i64..10).prop_map(Term::Int);
    leaf.prop_recursive(6, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(s),
            inner.clone().prop_map(p),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app(Symbol::plus(), vec![a, b])),
        ]
    })
}

proptest! {
    #[test]
    fn interpreted_ground_terms_stay_interpreted(t in interpreted_ground()) {
        let v = eval_ground_term(&t).unwrap();
        for name in ["R1", "R2"] {
            let trs: std::sync::Arc<Trs> = system(name);
            for st in rewrite_step(&trs, &t) {
                prop_assert!(st.term.is_interpreted());
                prop_assert_eq!(eval_ground_term(&st.term).unwrap(), v);
            }
        }
    }

    #[test]
    fn matching_substitution_is_unique_per_position_and_rule(n in -30i64..130) {
        let trs = system("R1");
        let t = f(f(Term::Int(n)));
        let steps = rewrite_step(&trs, &t);
        let keys: BTreeSet<(Position, usize)> = steps.iter().map(|st| (st.position.clone(), st.rule)).collect();
        prop_assert_eq!(keys.len(), steps.len());
    }
}

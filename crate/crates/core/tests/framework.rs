mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use ctrs_core::dp::{
    dependency_graph, enumerate_chains, explore_transitions, nontrivial_sccs, run_framework, scc_processor, Budget, ChainEvent,
    ChainLimits, DpProblem, NodeStatus, ProofTree, Strategy, Verdict,
};
use ctrs_core::interp::{PiSettings, PinnedModel, PinnedQueue};
use ctrs_core::term::{Symbol, Term};
use proptest::prelude::*;

fn prove(name: &str, strategy: &str) -> ProofTree {
    run_framework(system(name), &strategy.parse().unwrap(), &PiSettings::default(), Budget::default()).unwrap()
}

fn scc_ids(p: &DpProblem) -> Vec<BTreeSet<usize>> {
    scc_processor(p, None).unwrap().subproblems.iter().map(DpProblem::ids).collect()
}

/// Seeds `root#(n1, .., nk)` for every marked left-hand side root of `p`.
fn seeds(p: &DpProblem, values: &[i64]) -> Vec<Term> {
    let roots: BTreeSet<Symbol> = p.pairs.iter().map(|q| q.lhs_root().clone()).collect();
    let mut out = Vec::new();
    for root in roots {
        for (i, &a) in values.iter().enumerate() {
            let args = (0..root.arity())
                .map(|k| Term::Int(values[(i + 3 * k) % values.len()].max(a - 10 * k as i64)))
                .collect();
            out.push(Term::app(root.clone(), args));
        }
    }
    out
}

fn check_tree_invariants(tree: &ProofTree) {
    let leaves_trivial = tree
        .nodes
        .iter()
        .filter(|n| n.children.is_empty() && n.status != NodeStatus::Decomposed)
        .all(|n| n.status == NodeStatus::Trivial);
    assert_eq!(tree.verdict == Verdict::Proved, leaves_trivial);
    for n in &tree.nodes {
        for &c in &n.children {
            let child: BTreeSet<usize> = tree.nodes[c].pairs.iter().copied().collect();
            let parent: BTreeSet<usize> = n.pairs.iter().copied().collect();
            assert!(child.is_subset(&parent));
            assert!(child.len() < parent.len(), "node {} does not shrink into {c}", n.id);
        }
    }
}

#[test]
fn initial_problem_sizes() {
    assert_eq!(initial("R1").pairs.len(), 23);
    assert_eq!(initial("R2").pairs.len(), 8);
    let r0 = DpProblem::initial(system_from("s(p(x)) -> x\np(s(x)) -> x\n"));
    assert!(r0.is_trivial());
}

#[test]
fn r1_graph_has_edges_only_from_recursive_pairs() {
    let p = initial("R1");
    let edges = dependency_graph(&p, None).unwrap();
    let expected: BTreeSet<(usize, usize)> = [1, 2].iter().flat_map(|&u| (1..=23).map(move |v| (u, v))).collect();
    assert_eq!(edges, expected);
}

#[test]
fn r2_recursive_pairs_are_fully_connected() {
    let p = initial("R2");
    let edges = dependency_graph(&p, Some(&solver())).unwrap();
    let core = [2, 5, 7];
    for u in core {
        for v in core {
            assert!(edges.contains(&(u, v)), "missing {u} -> {v}");
        }
    }
    assert!(edges.iter().all(|(u, _)| core.contains(u)));
}

#[test]
fn empty_problem_has_empty_graph() {
    let p = initial("R1").restrict(&BTreeSet::new());
    assert!(dependency_graph(&p, None).unwrap().is_empty());
    assert!(nontrivial_sccs(&p, &BTreeSet::new()).is_empty());
    assert!(scc_processor(&p, None).unwrap().subproblems.is_empty());
}

#[test]
fn scc_results() {
    assert_eq!(scc_ids(&initial("R1")), vec![ids(&[1, 2])]);
    assert_eq!(scc_ids(&initial("R2")), vec![ids(&[2, 5, 7])]);
    for name in SYSTEMS {
        let p = initial(name);
        for sub in scc_ids(&p) {
            assert!(sub.is_subset(&p.ids()));
        }
    }
}

#[test]
fn self_loops_count_as_components() {
    let trs = system_from("SIG f/1 g/1\nf(x) -> f(p(x)) [x > 0]\nf(x) -> g(x)\ng(x) -> 0\n");
    let p = DpProblem::initial(trs);
    assert_eq!(scc_ids(&p), vec![ids(&[1])]);
}

#[test]
fn chain_examples() {
    let p = initial("R1").restrict(&ids(&[1, 2]));
    let f_mark = Symbol::uninterpreted("f", 1).marked();
    let seed = Term::app(f_mark.clone(), vec![Term::numeral(100)]);
    let set = enumerate_chains(&p, &seed, ChainLimits::with_depth(3));
    assert!(!set.chains.is_empty());
    let via_first = set
        .chains
        .iter()
        .find(|c| c.events.first() == Some(&ChainEvent::Pair { id: 1 }))
        .expect("pair 1 applies to the seed");
    assert_eq!(via_first.states[1], Term::app(f_mark, vec![f(Term::numeral(111))]));
    assert!(set.chains.iter().all(|c| c.pair_steps() <= 3));

    let set = enumerate_chains(&p, &seed, ChainLimits::with_depth(0));
    assert_eq!(set.chains.len(), 1);
    assert_eq!(set.chains[0].states, vec![seed.clone()]);

    let empty = p.restrict(&BTreeSet::new());
    let set = enumerate_chains(&empty, &seed, ChainLimits::with_depth(3));
    assert!(set.chains.iter().all(|c| c.events.is_empty()));
}

#[test]
fn rule_steps_happen_only_between_pair_steps() {
    let p = initial("R1").restrict(&ids(&[1, 2]));
    let seed = Term::app(Symbol::uninterpreted("f", 1).marked(), vec![Term::Int(95)]);
    for chain in enumerate_chains(&p, &seed, ChainLimits::with_depth(4)).chains {
        if let Some(first) = chain.events.first() {
            assert!(matches!(first, ChainEvent::Pair { .. }));
        }
        for ev in &chain.events {
            if let ChainEvent::Rule { position, .. } = ev {
                assert!(!position.is_root());
            }
        }
    }
}

#[test]
fn graph_contains_every_realized_edge() {
    let values: Vec<i64> = (-20..=120).step_by(7).collect();
    let cfg = solver();
    for name in SYSTEMS {
        let p = initial(name);
        let edges = dependency_graph(&p, Some(&cfg)).unwrap();
        let limits = ChainLimits {
            depth: 3,
            max_rewrites_between: 16,
            max_transitions: 2_000,
        };
        let mut realized = 0;
        for seed in seeds(&p, &values) {
            for (u, v) in explore_transitions(&p, &seed, limits).pair_successions() {
                realized += 1;
                assert!(edges.contains(&(u, v)), "{name}: {u} -> {v} realized but missing");
            }
        }
        assert!(realized > 0, "{name}: no two-step chains found");
    }
}

#[test]
fn chain_paths_and_transition_graph_agree() {
    let limits = ChainLimits {
        depth: 3,
        max_rewrites_between: 6,
        max_transitions: 1_000_000,
    };
    for name in SYSTEMS {
        let p = initial(name);
        for seed in seeds(&p, &[-3, 0, 2, 50, 99, 101, 111]) {
            let graph = explore_transitions(&p, &seed, limits);
            let from_graph: BTreeSet<(Term, ChainEvent, Term)> = graph
                .transitions
                .iter()
                .map(|t| (graph.states[t.from].clone(), t.event.clone(), graph.states[t.to].clone()))
                .collect();
            let mut from_paths = BTreeSet::new();
            for chain in enumerate_chains(&p, &seed, limits).chains {
                for (k, ev) in chain.events.iter().enumerate() {
                    from_paths.insert((chain.states[k].clone(), ev.clone(), chain.states[k + 1].clone()));
                }
            }
            assert_eq!(from_graph, from_paths, "{name} from {seed}");
        }
    }
}

/// Transitions along which `pi` fails to decrease weakly.
fn increases(p: &DpProblem, pi: &ctrs_core::interp::PiAssignment<i128>) -> usize {
    let limits = ChainLimits {
        depth: 4,
        max_rewrites_between: 8,
        max_transitions: 500,
    };
    let mut bad = 0;
    for seed in seeds(p, &[-40, 0, 37, 90, 100, 101, 102, 130]) {
        let g = explore_transitions(p, &seed, limits);
        let vals: Vec<i128> = g.states.iter().map(|t| pi.eval_ground(t).unwrap().unwrap()).collect();
        bad += g.transitions.iter().filter(|t| vals[t.from] < vals[t.to]).count();
    }
    bad
}

#[test]
fn known_model_decreases_along_chains_and_a_wrong_one_does_not() {
    use ctrs_core::interp::{Mode, Variant};
    let p = initial("R1").restrict(&ids(&[1, 2]));
    let mode = Mode::Variant(Variant::GtLeLe);
    let model = |fm: [i128; 2]| {
        let json = format!(r#"{{ "pol": {{ "f": [-10, 1], "f#": [{}, {}] }}, "c0": -101 }}"#, fm[0], fm[1]);
        PinnedModel::parse_all(&json).unwrap()[0].resolve(&p.system, mode).unwrap()
    };
    assert_eq!(increases(&p, &model([-1, -1])), 0);
    assert!(increases(&p, &model([-1, 1])) > 0);
}

#[test]
fn framework_examples() {
    let tree = prove("R1", "scc,pi:gt-le-le");
    assert_eq!(tree.verdict, Verdict::Proved);
    check_tree_invariants(&tree);

    let tree = prove("R2", "scc,legacy");
    assert_eq!(tree.verdict, Verdict::Proved);
    assert_eq!(tree.applications().filter(|(_, j)| j.processor == "legacy-pi").count(), 2);
    check_tree_invariants(&tree);

    let tree = prove("R3", "scc,pi:gt-ge-ge");
    assert_eq!(tree.verdict, Verdict::Proved);
    check_tree_invariants(&tree);

    let tree = prove("R1", "scc,pi:gt-ge-ge");
    assert_eq!(tree.verdict, Verdict::Unknown);
    check_tree_invariants(&tree);
    let stuck = tree.nodes.iter().find(|n| n.status == NodeStatus::Unresolved).unwrap();
    assert_eq!(stuck.pairs, vec![1, 2]);
    let pi = stuck.attempts.iter().find(|a| a.processor == "pi").unwrap();
    assert!(pi.note.as_deref().unwrap().contains("unsat"));
}

#[test]
fn pinned_legacy_replay_passes_through_the_single_pair() {
    let models = PinnedModel::load(&corpus_dir().join("pinned/R2-legacy.json")).unwrap();
    let settings = PiSettings {
        pinned: Some(PinnedQueue::new(models)),
        ..PiSettings::default()
    };
    let tree = run_framework(system("R2"), &"scc,legacy".parse().unwrap(), &settings, Budget::default()).unwrap();
    assert_eq!(tree.verdict, Verdict::Proved);
    let pair_sets: Vec<Vec<usize>> = tree.nodes.iter().map(|n| n.pairs.clone()).collect();
    assert!(pair_sets.contains(&vec![7]));
}

#[test]
fn default_strategy_proves_every_corpus_system() {
    for name in SYSTEMS {
        let tree = run_framework(system(name), &Strategy::default(), &PiSettings::default(), Budget::default()).unwrap();
        assert_eq!(tree.verdict, Verdict::Proved, "{name}");
        check_tree_invariants(&tree);
    }
}

#[test]
fn exhausted_budget_leaves_open_nodes() {
    let budget = Budget {
        max_iterations: 1,
        deadline: None,
    };
    let tree = run_framework(system("R1"), &"scc,pi:gt-le-le".parse().unwrap(), &PiSettings::default(), budget).unwrap();
    assert_eq!(tree.verdict, Verdict::Unknown);
    assert!(tree.nodes.iter().any(|n| n.status == NodeStatus::Open));
    check_tree_invariants(&tree);
}

#[test]
fn strategies_parse_and_print() {
    let s: Strategy = "scc,legacy,pi:lt-le-ge".parse().unwrap();
    assert_eq!(s.to_string(), "scc,legacy,pi:lt-le-ge");
    assert!("scc,pi:gt-gt-gt".parse::<Strategy>().is_err());
    assert!("".parse::<Strategy>().is_err());
    assert_eq!(
        Strategy::default().to_string(),
        "scc,legacy,pi:gt-ge-ge,pi:gt-le-le,pi:lt-ge-le,pi:lt-le-ge"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scc_subproblems_are_subsets(name in prop::sample::select(SYSTEMS.to_vec()), keep in prop::collection::btree_set(1usize..24, 0..24)) {
        let p = initial(name).restrict(&keep);
        let out = scc_processor(&p, None).unwrap();
        let mut seen = BTreeSet::new();
        for sub in &out.subproblems {
            prop_assert!(sub.ids().is_subset(&p.ids()));
            prop_assert!(sub.ids().is_disjoint(&seen));
            seen.extend(sub.ids());
        }
        prop_assert!(Arc::ptr_eq(&out.subproblems.first().map(|s| s.system.clone()).unwrap_or(p.system.clone()), &p.system));
    }
}

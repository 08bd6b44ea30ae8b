//! DP problems, the estimated dependency graph and the SCC processor.

mod chains;
mod driver;

pub use chains::{
    enumerate_chains, explore_transitions, Chain, ChainEvent, ChainLimits, ChainSet, Transition, TransitionGraph,
};
pub use driver::{
    run_framework, Budget, NodeStatus, ProcessorKind, ProofNode, ProofTree, Strategy, Verdict,
};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::error::Result;
use crate::lia::{self, Truth};
use crate::rules::{compute_dependency_pairs, DependencyPair, Trs};
use crate::smt::{ConstraintSystem, Model, SolverConfig};

/// A set of dependency pairs together with the (never modified) rules.
#[derive(Clone, Debug)]
pub struct DpProblem {
    pub system: Arc<Trs>,
    /// Sorted by id.
    pub pairs: Vec<DependencyPair>,
}

impl DpProblem {
    pub fn new(system: Arc<Trs>, mut pairs: Vec<DependencyPair>) -> DpProblem {
        pairs.sort_by_key(|p| p.id);
        pairs.dedup_by_key(|p| p.id);
        DpProblem { system, pairs }
    }

    /// `(DP(R), R)`.
    pub fn initial(system: Arc<Trs>) -> DpProblem {
        let pairs = compute_dependency_pairs(&system);
        DpProblem::new(system, pairs)
    }

    pub fn is_trivial(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<usize> {
        self.pairs.iter().map(|p| p.id).collect()
    }

    pub fn pair(&self, id: usize) -> Option<&DependencyPair> {
        self.pairs.iter().find(|p| p.id == id)
    }

    /// The subproblem keeping only the pairs in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> DpProblem {
        DpProblem {
            system: self.system.clone(),
            pairs: self.pairs.iter().filter(|p| keep.contains(&p.id)).cloned().collect(),
        }
    }

    /// The subproblem dropping the pairs in `drop`.
    pub fn without(&self, drop: &BTreeSet<usize>) -> DpProblem {
        DpProblem {
            system: self.system.clone(),
            pairs: self.pairs.iter().filter(|p| !drop.contains(&p.id)).cloned().collect(),
        }
    }
}

/// Edges of the estimated dependency graph, as `(from id, to id)`.
///
/// `u -> v` whenever the root of `u`'s right-hand side is the root of `v`'s
/// left-hand side. With `solver` set, pairs whose constraint is
/// unsatisfiable get no outgoing edges.
pub fn dependency_graph(p: &DpProblem, solver: Option<&SolverConfig>) -> Result<BTreeSet<(usize, usize)>> {
    let mut live = BTreeSet::new();
    for pair in &p.pairs {
        let feasible = match solver {
            Some(cfg) => lia::is_satisfiable(&pair.constraint, cfg)? != Truth::No,
            None => true,
        };
        if feasible {
            live.insert(pair.id);
        }
    }
    let mut edges = BTreeSet::new();
    for u in p.pairs.iter().filter(|u| live.contains(&u.id)) {
        for v in &p.pairs {
            if u.rhs_root() == v.lhs_root() {
                edges.insert((u.id, v.id));
            }
        }
    }
    Ok(edges)
}

/// Pair sets of the nontrivial strongly connected components (those with at
/// least one edge, self-loops included), ordered by smallest id.
pub fn nontrivial_sccs(p: &DpProblem, edges: &BTreeSet<(usize, usize)>) -> Vec<BTreeSet<usize>> {
    let mut g = DiGraph::<usize, ()>::new();
    let index: BTreeMap<usize, NodeIndex> = p.pairs.iter().map(|q| (q.id, g.add_node(q.id))).collect();
    for (u, v) in edges {
        g.add_edge(index[u], index[v], ());
    }
    let mut out: Vec<BTreeSet<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|comp| comp.into_iter().map(|n| g[n]).collect::<BTreeSet<usize>>())
        .filter(|comp| {
            comp.len() > 1 || comp.iter().any(|u| edges.contains(&(*u, *u)))
        })
        .collect();
    out.sort();
    out
}

/// What a processor did to a problem.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Justification {
    /// `scc`, `legacy-pi` or `pi`.
    pub processor: String,
    /// Direction tuple for the variant processors, e.g. `(>,<=,<=)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    /// Pairs that occur in no subproblem.
    pub removed: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_pairs: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounded_pairs: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter_pairs: Option<Vec<usize>>,
    /// Coefficient vectors `[b0, b1, ..]` per symbol.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<BTreeMap<String, Vec<i128>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<i128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// The synthesis query and the model it produced, kept for auditing.
    #[serde(skip)]
    pub synthesis: Option<Arc<(ConstraintSystem, Model)>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverStats {
    /// `sat`, `unsat`, `unknown`, `timeout` or `pinned`.
    pub status: String,
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug)]
pub struct ProcessorOutcome {
    pub subproblems: Vec<DpProblem>,
    pub justification: Justification,
}

impl ProcessorOutcome {
    /// The input problem, unchanged.
    pub fn unchanged(p: &DpProblem, justification: Justification) -> ProcessorOutcome {
        ProcessorOutcome {
            subproblems: vec![p.clone()],
            justification,
        }
    }

    /// Whether every subproblem is strictly smaller than `input`.
    pub fn makes_progress(&self, input: &DpProblem) -> bool {
        let n = input.pairs.len();
        self.subproblems.iter().all(|s| s.pairs.len() < n)
    }
}

/// One subproblem per nontrivial SCC; other pairs are dropped.
pub fn scc_processor(p: &DpProblem, solver: Option<&SolverConfig>) -> Result<ProcessorOutcome> {
    let edges = dependency_graph(p, solver)?;
    let comps = nontrivial_sccs(p, &edges);
    let kept: BTreeSet<usize> = comps.iter().flatten().copied().collect();
    let subproblems = comps.iter().map(|c| p.restrict(c)).collect();
    Ok(ProcessorOutcome {
        subproblems,
        justification: Justification {
            processor: "scc".into(),
            removed: p.ids().difference(&kept).copied().collect(),
            ..Justification::default()
        },
    })
}

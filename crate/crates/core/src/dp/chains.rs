//! Bounded enumeration of ground dependency chains.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::DpProblem;
use crate::lia;
use crate::rules::rewrite_below_root;
use crate::term::{match_term, Position, Term};

#[derive(Clone, Copy, Debug)]
pub struct ChainLimits {
    /// Maximum number of pair steps per chain.
    pub depth: usize,
    /// Maximum number of rule steps between two pair steps.
    pub max_rewrites_between: usize,
    /// Maximum number of transitions explored in total.
    pub max_transitions: usize,
}

impl ChainLimits {
    pub fn with_depth(depth: usize) -> ChainLimits {
        ChainLimits {
            depth,
            max_rewrites_between: 64,
            max_transitions: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChainEvent {
    /// A root step with the pair of this id.
    Pair { id: usize },
    /// A rule step strictly below the root.
    Rule { rule: usize, position: Position },
}

/// `states[k] -> states[k + 1]` by `events[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub states: Vec<Term>,
    pub events: Vec<ChainEvent>,
    /// Some continuation was cut off by a limit.
    pub truncated: bool,
    /// The last state was already expanded by an earlier chain with the same
    /// preceding pair; its continuations are recorded there.
    pub merged: bool,
}

impl Chain {
    pub fn pair_steps(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, ChainEvent::Pair { .. })).count()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ChainSet {
    /// Maximal chains under the limits.
    pub chains: Vec<Chain>,
    /// Some limit was hit.
    pub truncated: bool,
}

/// A search node: state, pair steps so far, rule steps since the last pair
/// step, and the last pair used.
type Key = (Term, usize, Option<usize>, Option<usize>);

struct Search<'a> {
    p: &'a DpProblem,
    limits: ChainLimits,
    transitions: usize,
    expanded: HashSet<Key>,
    out: ChainSet,
}

/// Ground chains starting at `seed`: a pair step, then any number of rule
/// steps below the root, then a pair step, and so on. Chains are not
/// required to be minimal. Every reachable transition within the limits
/// occurs in some chain, but a chain reaching an already expanded search
/// node stops there (`merged`).
pub fn enumerate_chains(p: &DpProblem, seed: &Term, limits: ChainLimits) -> ChainSet {
    let mut search = Search {
        p,
        limits,
        transitions: 0,
        expanded: HashSet::new(),
        out: ChainSet::default(),
    };
    let mut chain = Chain {
        states: vec![seed.clone()],
        events: Vec::new(),
        truncated: false,
        merged: false,
    };
    search.extend(&mut chain, 0, None, None);
    search.out
}

impl Search<'_> {
    /// `rewrites` is `None` before the first pair step, where rule steps are
    /// not allowed.
    fn extend(&mut self, chain: &mut Chain, pairs_done: usize, rewrites: Option<usize>, last: Option<usize>) {
        let cur = chain.states.last().unwrap().clone();
        if !self.expanded.insert((cur.clone(), pairs_done, rewrites, last)) {
            let mut done = chain.clone();
            done.merged = true;
            self.out.chains.push(done);
            return;
        }
        let (successors, cut) = successors(self.p, &self.limits, &cur, pairs_done, rewrites);
        if successors.is_empty() || self.transitions >= self.limits.max_transitions {
            let truncated = cut || !successors.is_empty();
            self.out.truncated |= truncated;
            let mut done = chain.clone();
            done.truncated = truncated;
            self.out.chains.push(done);
            return;
        }
        if cut {
            self.out.truncated = true;
        }
        for (ev, next, done, rw) in successors {
            if self.transitions >= self.limits.max_transitions {
                self.out.truncated = true;
                break;
            }
            self.transitions += 1;
            let last = match ev {
                ChainEvent::Pair { id } => Some(id),
                ChainEvent::Rule { .. } => last,
            };
            chain.events.push(ev);
            chain.states.push(next);
            self.extend(chain, done, rw, last);
            chain.events.pop();
            chain.states.pop();
        }
    }
}

type Successor = (ChainEvent, Term, usize, Option<usize>);

/// Successors of a search node, and whether the rewrite limit cut some off.
fn successors(
    p: &DpProblem,
    limits: &ChainLimits,
    cur: &Term,
    pairs_done: usize,
    rewrites: Option<usize>,
) -> (Vec<Successor>, bool) {
    let mut out = Vec::new();
    let mut cut = false;
    if pairs_done < limits.depth {
        for pair in &p.pairs {
            if let Some(next) = pair_step(pair, cur) {
                out.push((ChainEvent::Pair { id: pair.id }, next, pairs_done + 1, Some(0)));
            }
        }
        if let Some(k) = rewrites {
            let below = rewrite_below_root(&p.system, cur);
            if k >= limits.max_rewrites_between && !below.is_empty() {
                cut = true;
            } else {
                for step in below {
                    let ev = ChainEvent::Rule {
                        rule: step.rule,
                        position: step.position,
                    };
                    out.push((ev, step.term, pairs_done, Some(k + 1)));
                }
            }
        }
    }
    (out, cut)
}

/// One explored step `states[from] -> states[to]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub event: ChainEvent,
    /// The pair step that most recently preceded this transition.
    pub previous_pair: Option<usize>,
}

/// Every transition of every chain from one seed under the limits, with
/// each distinct state stored once. `states[0]` is the seed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct TransitionGraph {
    pub states: Vec<Term>,
    pub transitions: Vec<Transition>,
    pub truncated: bool,
}

impl TransitionGraph {
    /// Consecutive pair steps `(u, v)` with only rule steps in between.
    pub fn pair_successions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.transitions.iter().filter_map(|t| match (&t.event, t.previous_pair) {
            (ChainEvent::Pair { id }, Some(u)) => Some((u, *id)),
            _ => None,
        })
    }
}

/// The transitions reachable from `seed` along chains within `limits`,
/// explored breadth first. Unlike [`enumerate_chains`] no path is ever
/// copied, so this scales to deep limits.
pub fn explore_transitions(p: &DpProblem, seed: &Term, limits: ChainLimits) -> TransitionGraph {
    let mut graph = TransitionGraph::default();
    let mut index: HashMap<Term, usize> = HashMap::new();
    let mut intern = |graph: &mut TransitionGraph, t: Term| -> usize {
        *index.entry(t).or_insert_with_key(|t| {
            graph.states.push(t.clone());
            graph.states.len() - 1
        })
    };
    let root = intern(&mut graph, seed.clone());
    let mut seen: HashSet<(usize, usize, Option<usize>, Option<usize>)> = HashSet::new();
    let mut queue = VecDeque::from([(root, 0usize, None::<usize>, None::<usize>)]);
    seen.insert((root, 0, None, None));
    while let Some((at, pairs_done, rewrites, last)) = queue.pop_front() {
        let cur = graph.states[at].clone();
        let (next, cut) = successors(p, &limits, &cur, pairs_done, rewrites);
        graph.truncated |= cut;
        for (event, term, done, rw) in next {
            if graph.transitions.len() >= limits.max_transitions {
                graph.truncated = true;
                return graph;
            }
            let to = intern(&mut graph, term);
            let after = match event {
                ChainEvent::Pair { id } => Some(id),
                ChainEvent::Rule { .. } => last,
            };
            graph.transitions.push(Transition {
                from: at,
                to,
                event,
                previous_pair: last,
            });
            if seen.insert((to, done, rw, after)) {
                queue.push_back((to, done, rw, after));
            }
        }
    }
    graph
}

fn pair_step(pair: &crate::rules::DependencyPair, t: &Term) -> Option<Term> {
    let sigma = match_term(&pair.lhs, t)?;
    lia::holds_under(&pair.constraint, &sigma).then(|| pair.rhs.apply(&sigma))
}

//! Proof search: repeatedly decompose open problems with the first processor
//! of the strategy that makes them strictly smaller.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::{scc_processor, DpProblem, Justification};
use crate::error::Result;
use crate::interp::{pi_processor, Mode, PiSettings, Variant};
use crate::rules::Trs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProcessorKind {
    Scc,
    Pi(Mode),
}

impl fmt::Display for ProcessorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessorKind::Scc => f.write_str("scc"),
            ProcessorKind::Pi(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for ProcessorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "scc" => Ok(ProcessorKind::Scc),
            "legacy" => Ok(ProcessorKind::Pi(Mode::Legacy)),
            other => match other.strip_prefix("pi:") {
                Some(v) => Ok(ProcessorKind::Pi(Mode::Variant(v.parse()?))),
                None => Err(format!(
                    "unknown processor `{other}` (expected scc, legacy or pi:<variant>)"
                )),
            },
        }
    }
}

/// Processors in order of preference.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Strategy(pub Vec<ProcessorKind>);

impl Default for Strategy {
    fn default() -> Self {
        let mut v = vec![ProcessorKind::Scc, ProcessorKind::Pi(Mode::Legacy)];
        v.extend(
            [Variant::GtGeGe, Variant::GtLeLe, Variant::LtGeLe, Variant::LtLeGe]
                .map(|v| ProcessorKind::Pi(Mode::Variant(v))),
        );
        Strategy(v)
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let kinds = s.split(',').map(str::parse).collect::<std::result::Result<Vec<_>, _>>()?;
        if kinds.is_empty() {
            return Err("empty strategy".into());
        }
        Ok(Strategy(kinds))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Budget {
    /// Maximum number of processor applications, successful or not.
    pub max_iterations: usize,
    pub deadline: Option<Instant>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_iterations: 200,
            deadline: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    /// No pairs left.
    Trivial,
    /// A processor split the problem into the children.
    Decomposed,
    /// No processor made progress.
    Unresolved,
    /// The budget ran out before the node was handled.
    Open,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProofNode {
    pub id: usize,
    pub pairs: Vec<usize>,
    pub status: NodeStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub application: Option<Justification>,
    /// Processor attempts that made no progress, in strategy order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub attempts: Vec<Justification>,
    pub children: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proved,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProofTree {
    pub verdict: Verdict,
    /// Node 0 is the initial problem.
    pub nodes: Vec<ProofNode>,
    #[serde(skip)]
    pub problems: Vec<DpProblem>,
}

impl ProofTree {
    /// Every successful processor application with the problem it was
    /// applied to.
    pub fn applications(&self) -> impl Iterator<Item = (&DpProblem, &Justification)> {
        self.nodes
            .iter()
            .filter_map(|n| n.application.as_ref().map(|a| (&self.problems[n.id], a)))
    }
}

/// Runs the framework on `(DP(R), R)`.
pub fn run_framework(trs: Arc<Trs>, strategy: &Strategy, settings: &PiSettings, budget: Budget) -> Result<ProofTree> {
    run_on(DpProblem::initial(trs), strategy, settings, budget)
}

/// Runs the framework on an arbitrary initial problem.
pub fn run_on(root: DpProblem, strategy: &Strategy, settings: &PiSettings, budget: Budget) -> Result<ProofTree> {
    let mut problems = vec![root];
    let mut nodes = vec![new_node(0, &problems[0])];
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut iterations = 0usize;
    let out_of_budget = |iterations: usize| {
        iterations >= budget.max_iterations || budget.deadline.is_some_and(|d| Instant::now() >= d)
    };

    while let Some(id) = queue.pop_front() {
        let problem = problems[id].clone();
        if problem.is_trivial() {
            nodes[id].status = NodeStatus::Trivial;
            continue;
        }
        let mut resolved = false;
        for kind in &strategy.0 {
            if out_of_budget(iterations) {
                break;
            }
            iterations += 1;
            let outcome = match kind {
                ProcessorKind::Scc => scc_processor(&problem, None)?,
                ProcessorKind::Pi(mode) => pi_processor(&problem, *mode, settings, budget.deadline)?,
            };
            if !outcome.makes_progress(&problem) {
                nodes[id].attempts.push(outcome.justification);
                continue;
            }
            for sub in outcome.subproblems {
                let child = problems.len();
                nodes.push(new_node(child, &sub));
                problems.push(sub);
                nodes[id].children.push(child);
                queue.push_back(child);
            }
            nodes[id].application = Some(outcome.justification);
            nodes[id].status = NodeStatus::Decomposed;
            resolved = true;
            break;
        }
        if !resolved {
            nodes[id].status = if out_of_budget(iterations) {
                NodeStatus::Open
            } else {
                NodeStatus::Unresolved
            };
        }
    }
    // children of nodes left open by the budget never get processed
    for n in &mut nodes {
        if n.status == NodeStatus::Open && n.pairs.is_empty() {
            n.status = NodeStatus::Trivial;
        }
    }
    let proved = nodes
        .iter()
        .all(|n| matches!(n.status, NodeStatus::Trivial | NodeStatus::Decomposed));
    Ok(ProofTree {
        verdict: if proved { Verdict::Proved } else { Verdict::Unknown },
        nodes,
        problems,
    })
}

fn new_node(id: usize, p: &DpProblem) -> ProofNode {
    ProofNode {
        id,
        pairs: p.ids().into_iter().collect(),
        status: NodeStatus::Open,
        application: None,
        attempts: Vec::new(),
        children: Vec::new(),
    }
}

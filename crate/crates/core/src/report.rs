//! Rendering of proof attempts for people and for tools.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dp::{Justification, NodeStatus, ProofTree, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Proved,
    Unknown,
    InputError,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Proved => 0,
            Outcome::Unknown => 1,
            Outcome::InputError => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Proved => "proved",
            Outcome::Unknown => "unknown",
            Outcome::InputError => "input-error",
        }
    }
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Outcome {
        match v {
            Verdict::Proved => Outcome::Proved,
            Verdict::Unknown => Outcome::Unknown,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub system: String,
    pub verdict: Outcome,
    pub strategy: String,
    /// The dependency pairs as `(id) lhs -> rhs [constraint]`.
    pub pairs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proof: Option<ProofTree>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn input_error(system: &str, strategy: &str, error: impl ToString) -> RunReport {
        RunReport {
            system: system.into(),
            verdict: Outcome::InputError,
            strategy: strategy.into(),
            pairs: Vec::new(),
            proof: None,
            error: Some(error.to_string()),
        }
    }

    pub fn from_tree(system: &str, strategy: &str, tree: ProofTree) -> RunReport {
        RunReport {
            system: system.into(),
            verdict: tree.verdict.into(),
            strategy: strategy.into(),
            pairs: tree.problems[0].pairs.iter().map(ToString::to_string).collect(),
            proof: Some(tree),
            error: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {}", self.system, self.verdict.as_str().to_uppercase());
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error: {e}");
            return out;
        }
        let _ = writeln!(out, "strategy: {}", self.strategy);
        let _ = writeln!(out, "\ndependency pairs:");
        for p in &self.pairs {
            let _ = writeln!(out, "  {p}");
        }
        if let Some(tree) = &self.proof {
            let _ = writeln!(out);
            for n in &tree.nodes {
                let _ = writeln!(out, "problem #{} {}", n.id, id_set(&n.pairs));
                match n.status {
                    NodeStatus::Trivial => {
                        let _ = writeln!(out, "  trivially finite");
                    }
                    NodeStatus::Decomposed => {
                        let j = n.application.as_ref().expect("decomposed nodes record an application");
                        render_justification(&mut out, j);
                        let kids: Vec<String> = n.children.iter().map(|c| format!("#{c}")).collect();
                        let kids = if kids.is_empty() { "none".to_string() } else { kids.join(", ") };
                        let _ = writeln!(out, "  subproblems: {kids}");
                    }
                    NodeStatus::Unresolved | NodeStatus::Open => {
                        let what = if n.status == NodeStatus::Open {
                            "budget exhausted"
                        } else {
                            "no processor applies"
                        };
                        let _ = writeln!(out, "  open: {what}");
                        for a in &n.attempts {
                            let _ = writeln!(
                                out,
                                "    {}: {}",
                                processor_name(a),
                                a.note.as_deref().unwrap_or("no progress")
                            );
                        }
                    }
                }
            }
        }
        out
    }
}

fn id_set(ids: &[usize]) -> String {
    let ids: Vec<String> = ids.iter().map(|i| format!("({i})")).collect();
    format!("{{{}}}", ids.join(", "))
}

fn processor_name(j: &Justification) -> String {
    match &j.variant {
        Some(v) => format!("{} {v}", j.processor),
        None => j.processor.clone(),
    }
}

fn render_justification(out: &mut String, j: &Justification) {
    let _ = writeln!(out, "  by {}", processor_name(j));
    if let Some(pi) = &j.interpretation {
        for (f, cs) in pi {
            let _ = writeln!(out, "    Pol({f}) = {}", crate::interp::format_coefficients(cs));
        }
    }
    if let Some(c0) = j.c0 {
        let _ = writeln!(out, "    c0 = {c0}");
    }
    for (label, set) in [
        ("strict", &j.strict_pairs),
        ("bounded", &j.bounded_pairs),
        ("filtered", &j.filter_pairs),
    ] {
        if let Some(s) = set {
            let _ = writeln!(out, "    {label}: {}", id_set(s));
        }
    }
    if let Some(s) = &j.solver {
        let _ = writeln!(out, "    solver: {} in {:.2}s", s.status, s.wall_time_secs);
    }
    let _ = writeln!(out, "    removed: {}", id_set(&j.removed));
}

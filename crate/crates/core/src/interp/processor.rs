//! The PI processors as DP processors.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use super::conditions::{build_conditions, Built, C0};
use super::pinned::PinnedQueue;
use super::poly::PiAssignment;
use super::verify::{verify_model, Classification, Verification};
use super::{Mode, SignScope};
use crate::dp::{DpProblem, Justification, ProcessorOutcome, SolverStats};
use crate::error::{Error, Result};
use crate::smt::{self, SolverConfig, Status, Value};
use crate::term::Symbol;

#[derive(Clone, Debug, Default)]
pub struct PiSettings {
    pub solver: SolverConfig,
    pub sign_scope: SignScope,
    /// Restricts every coefficient to `[-b, b]`.
    pub coefficient_bound: Option<u64>,
    /// When set, interpretations are taken from here instead of synthesized.
    pub pinned: Option<PinnedQueue>,
}

fn base_justification(mode: Mode) -> Justification {
    match mode {
        Mode::Legacy => Justification {
            processor: "legacy-pi".into(),
            ..Justification::default()
        },
        Mode::Variant(v) => Justification {
            processor: "pi".into(),
            variant: Some(v.tuple()),
            ..Justification::default()
        },
    }
}

fn unchanged(p: &DpProblem, mut j: Justification, note: impl Into<String>) -> ProcessorOutcome {
    j.note = Some(note.into());
    ProcessorOutcome::unchanged(p, j)
}

/// Applies the processor selected by `mode` to `p`. Solver protocol failures
/// are errors; unsat, unknown and timeout answers leave the problem
/// unchanged with a note saying which.
pub fn pi_processor(
    p: &DpProblem,
    mode: Mode,
    settings: &PiSettings,
    deadline: Option<Instant>,
) -> Result<ProcessorOutcome> {
    let mut j = base_justification(mode);
    if p.is_trivial() {
        j.note = Some("no pairs".into());
        return Ok(ProcessorOutcome {
            subproblems: Vec::new(),
            justification: j,
        });
    }

    let (pi, c0) = match &settings.pinned {
        Some(queue) => {
            let Some(model) = queue.next() else {
                return Ok(unchanged(p, j, "no pinned interpretation left"));
            };
            j.solver = Some(SolverStats {
                status: "pinned".into(),
                wall_time_secs: 0.0,
            });
            (model.resolve(&p.system, mode)?, model.c0)
        }
        None => {
            let conditions = match build_conditions(p, mode, settings.sign_scope, settings.coefficient_bound)? {
                Built::Infeasible(why) => return Ok(unchanged(p, j, format!("not applicable: {why}"))),
                Built::Ready(c) => c,
            };
            let mut cfg = settings.solver.clone();
            if let Some(d) = deadline {
                let left = d.saturating_duration_since(Instant::now());
                if left.is_zero() {
                    return Ok(unchanged(p, j, "time budget exhausted"));
                }
                cfg.timeout = cfg.timeout.min(left);
            }
            let verdict = smt::check(&conditions.system, &cfg)?;
            let status = match &verdict.status {
                Status::Sat => "sat",
                Status::Unsat => "unsat",
                Status::Unknown => "unknown",
                Status::Timeout => "timeout",
                Status::ProtocolError(msg) => return Err(Error::SolverProtocol(msg.clone())),
            };
            j.solver = Some(SolverStats {
                status: status.into(),
                wall_time_secs: verdict.wall_time.as_secs_f64(),
            });
            match verdict.status {
                Status::Sat => {}
                Status::Unsat => return Ok(unchanged(p, j, "no suitable interpretation exists (unsat)")),
                _ => return Ok(unchanged(p, j, format!("undetermined ({status})"))),
            }
            let model = verdict.model.expect("sat verdicts carry a model");
            let pi = conditions.template.instantiate(&model)?;
            let c0 = match model.get(C0) {
                Some(Value::Int(n)) => *n,
                _ => return Err(Error::SolverProtocol("model lacks c0".into())),
            };
            j.synthesis = Some(Arc::new((conditions.system, model)));
            (pi, c0)
        }
    };

    record_interpretation(&mut j, p, &pi, c0);
    let cls = match verify_model(p, mode, &pi, c0, settings.sign_scope, &settings.solver)? {
        Verification::Accepted(c) => c,
        Verification::Rejected { condition, undetermined } => {
            let kind = if undetermined { "could not be checked" } else { "rejected" };
            return Ok(unchanged(p, j, format!("interpretation {kind}: {condition}")));
        }
    };
    j.strict_pairs = Some(cls.strict.iter().copied().collect());
    j.bounded_pairs = Some(cls.bounded.iter().copied().collect());
    j.filter_pairs = cls.filter.as_ref().map(|f| f.iter().copied().collect());
    j.c0 = cls.c0;
    Ok(split(p, &cls, j))
}

/// Records the polynomials of the marked symbols heading pairs of `p` and,
/// when the interpretation has them, of the uninterpreted symbols.
fn record_interpretation(j: &mut Justification, p: &DpProblem, pi: &PiAssignment<i128>, c0: i128) {
    let heads: BTreeSet<&Symbol> = p.pairs.iter().flat_map(|d| [d.lhs_root(), d.rhs_root()]).collect();
    j.interpretation = Some(
        pi.polys
            .iter()
            .filter(|(f, _)| !f.is_marked() || heads.contains(f))
            .map(|(f, cs)| (f.to_string(), cs.clone()))
            .collect(),
    );
    j.c0 = Some(c0);
}

fn split(p: &DpProblem, cls: &Classification, mut j: Justification) -> ProcessorOutcome {
    let mut removals: Vec<&BTreeSet<usize>> = vec![&cls.strict, &cls.bounded];
    if let Some(f) = &cls.filter {
        removals.push(f);
    }
    if removals.iter().any(|r| r.is_empty()) {
        return unchanged(p, j, "interpretation found, but it removes no pair from some subproblem");
    }
    let mut subproblems: Vec<DpProblem> = Vec::new();
    for r in &removals {
        let sub = p.without(r);
        if !subproblems.iter().any(|s| s.ids() == sub.ids()) {
            subproblems.push(sub);
        }
    }
    let kept: BTreeSet<usize> = subproblems.iter().flat_map(|s| s.ids()).collect();
    j.removed = p.ids().difference(&kept).copied().collect();
    ProcessorOutcome {
        subproblems,
        justification: j,
    }
}

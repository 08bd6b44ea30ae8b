//! Polynomial-interpretation processors: the legacy processor that ignores
//! the rules, and four processors that take the rules into account and turn
//! chains into bounded monotone integer sequences.

mod conditions;
mod pinned;
pub mod poly;
mod processor;
mod verify;

pub use conditions::{build_conditions, Built, ConditionStats, Conditions, PairGuards};
pub use pinned::{PinnedModel, PinnedQueue};
pub use poly::{format_coefficients, Coeff, LinearPoly, PiAssignment, SymPoly};
pub use processor::{pi_processor, PiSettings};
pub use verify::{verify_model, Classification, Verification};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::rules::{DependencyPair, Trs};
use crate::smt::CmpOp;
use crate::term::{Position, Symbol, Term};

/// Direction choices `(chains, rules, reducible coefficients)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Variant {
    /// `(>, >=, >=)`: chains and rewrite steps both decrease.
    GtGeGe,
    /// `(<, >=, <=)`: chains increase, rewrite steps decrease.
    LtGeLe,
    /// `(>, <=, <=)`: chains decrease, rewrite steps increase.
    GtLeLe,
    /// `(<, <=, >=)`: chains and rewrite steps both increase.
    LtLeGe,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::GtGeGe, Variant::LtGeLe, Variant::GtLeLe, Variant::LtLeGe];

    /// Strict comparison for chain steps.
    pub fn strict(self) -> CmpOp {
        match self {
            Variant::GtGeGe | Variant::GtLeLe => CmpOp::Gt,
            Variant::LtGeLe | Variant::LtLeGe => CmpOp::Lt,
        }
    }

    /// The strict comparison or equality.
    pub fn weak(self) -> CmpOp {
        match self.strict() {
            CmpOp::Gt => CmpOp::Ge,
            _ => CmpOp::Le,
        }
    }

    /// Comparison `Pol(l) ? Pol(r)` required of every rule.
    pub fn rules(self) -> CmpOp {
        match self {
            Variant::GtGeGe | Variant::LtGeLe => CmpOp::Ge,
            Variant::GtLeLe | Variant::LtLeGe => CmpOp::Le,
        }
    }

    /// Sign `a_i ? 0` required of reducible-position coefficients.
    pub fn sign(self) -> CmpOp {
        match self {
            Variant::GtGeGe | Variant::LtLeGe => CmpOp::Ge,
            Variant::LtGeLe | Variant::GtLeLe => CmpOp::Le,
        }
    }

    /// The variant with both chain and reducible-coefficient directions
    /// flipped; it proves the same problems.
    pub fn mirror(self) -> Variant {
        match self {
            Variant::GtGeGe => Variant::LtGeLe,
            Variant::LtGeLe => Variant::GtGeGe,
            Variant::GtLeLe => Variant::LtLeGe,
            Variant::LtLeGe => Variant::GtLeLe,
        }
    }

    /// Command-line name, e.g. `gt-le-le`.
    pub fn name(self) -> &'static str {
        match self {
            Variant::GtGeGe => "gt-ge-ge",
            Variant::LtGeLe => "lt-ge-le",
            Variant::GtLeLe => "gt-le-le",
            Variant::LtLeGe => "lt-le-ge",
        }
    }

    /// Tuple notation, e.g. `(>,<=,<=)`.
    pub fn tuple(self) -> String {
        let s = |op: CmpOp| match op {
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
        };
        format!("({},{},{})", s(self.strict()), s(self.rules()), s(self.sign()))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected gt-ge-ge, lt-ge-le, gt-le-le or lt-le-ge)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    /// Interprets marked symbols only and ignores the rules.
    Legacy,
    Variant(Variant),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Legacy => f.write_str("legacy"),
            Mode::Variant(v) => write!(f, "pi:{v}"),
        }
    }
}

/// Which marked-symbol argument positions the sign requirement of a variant
/// applies to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum SignScope {
    /// Every argument position of every marked symbol.
    #[default]
    AllPositions,
    /// Only reducible positions.
    Reducible,
}

impl FromStr for SignScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(SignScope::AllPositions),
            "reducible" => Ok(SignScope::Reducible),
            _ => Err(format!("unknown sign scope `{s}` (expected all or reducible)")),
        }
    }
}

/// Argument positions (1-based) of marked symbols at which some pair's
/// right-hand side carries a term outside `T(G_int, Var(constraint))`.
pub fn reducible_positions<'a>(
    pairs: impl IntoIterator<Item = &'a DependencyPair>,
) -> BTreeMap<Symbol, BTreeSet<usize>> {
    let mut out: BTreeMap<Symbol, BTreeSet<usize>> = BTreeMap::new();
    for pair in pairs {
        let cvars = pair.constraint.vars();
        for (i, t) in pair.rhs.args().iter().enumerate() {
            if !t.is_interpreted_over(&cvars) {
                out.entry(pair.rhs_root().clone()).or_default().insert(i + 1);
            }
        }
    }
    out
}

/// Where a rule or pair puts a non-interpreted term below a subtraction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubtractionViolation {
    /// `rule N` or `pair N`.
    pub origin: String,
    pub position: Position,
}

impl fmt::Display for SubtractionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {}", self.origin, self.position)
    }
}

/// Checks that the subtrahend of every `-` on a right-hand side of `R ∪ S`
/// lies in `T(G_int, Var(constraint))`.
pub fn check_subtraction_condition(trs: &Trs, pairs: &[DependencyPair]) -> Vec<SubtractionViolation> {
    let mut out = Vec::new();
    let sides = trs
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| (format!("rule {}", i + 1), &r.rhs, &r.constraint))
        .chain(pairs.iter().map(|p| (format!("pair {}", p.id), &p.rhs, &p.constraint)));
    for (origin, rhs, constraint) in sides {
        let cvars = constraint.vars();
        rhs.visit(&mut |t: &Term, pos| {
            if let Term::App(f, args) = t {
                if f.is_interpreted() && f.name() == "-" && !args[1].is_interpreted_over(&cvars) {
                    out.push(SubtractionViolation {
                        origin: origin.clone(),
                        position: pos.clone(),
                    });
                }
            }
        });
    }
    out
}

/// Positions (1-based) of marked symbols whose coefficient must be zero for
/// the legacy processor: some pair side carries an uninterpreted symbol
/// there.
pub fn uninterpreted_positions(pairs: &[DependencyPair]) -> BTreeMap<Symbol, BTreeSet<usize>> {
    let mut out: BTreeMap<Symbol, BTreeSet<usize>> = BTreeMap::new();
    for pair in pairs {
        for side in [&pair.lhs, &pair.rhs] {
            for (i, t) in side.args().iter().enumerate() {
                if !t.is_interpreted() {
                    out.entry(side.root().unwrap().clone()).or_default().insert(i + 1);
                }
            }
        }
    }
    out
}

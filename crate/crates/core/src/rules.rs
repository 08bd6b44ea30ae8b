//! Constrained rewrite rules, the ground rewrite relation and dependency
//! pairs.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::lia::{self, Formula, Truth};
use crate::smt::SolverConfig;
use crate::term::{match_term, Position, Symbol, Term, Var};

/// `lhs -> rhs [constraint]`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ConstrainedRule {
    pub lhs: Term,
    pub rhs: Term,
    pub constraint: Formula,
}

impl ConstrainedRule {
    pub fn new(lhs: Term, rhs: Term, constraint: Formula) -> ConstrainedRule {
        ConstrainedRule { lhs, rhs, constraint }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vs = self.lhs.vars();
        vs.extend(self.rhs.vars());
        vs.extend(self.constraint.vars());
        vs
    }
}

impl fmt::Display for ConstrainedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)?;
        if self.constraint != Formula::True {
            write!(f, " [{}]", self.constraint)?;
        }
        Ok(())
    }
}

impl fmt::Debug for ConstrainedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    VariableLhs,
    EscapedVariables(Vec<Var>),
    UninterpretedInConstraint,
    MarkedSymbol(Symbol),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VariableLhs => f.write_str("left-hand side is a variable"),
            Violation::EscapedVariables(vs) => {
                let names: Vec<String> = vs.iter().map(ToString::to_string).collect();
                write!(f, "variable(s) {} do not occur in the left-hand side", names.join(", "))
            }
            Violation::UninterpretedInConstraint => {
                f.write_str("constraint contains an uninterpreted symbol")
            }
            Violation::MarkedSymbol(s) => write!(f, "marked symbol {s} in a rule"),
        }
    }
}

/// Every violated rule condition, in a fixed order.
pub fn check_rule_wellformed(rule: &ConstrainedRule) -> Vec<Violation> {
    let mut out = Vec::new();
    if rule.lhs.is_var() || matches!(rule.lhs, Term::Int(_)) {
        out.push(Violation::VariableLhs);
    }
    let lhs_vars = rule.lhs.vars();
    let mut escaped: BTreeSet<Var> = rule.rhs.vars();
    escaped.extend(rule.constraint.vars());
    let escaped: Vec<Var> = escaped.into_iter().filter(|v| !lhs_vars.contains(v)).collect();
    if !escaped.is_empty() {
        out.push(Violation::EscapedVariables(escaped));
    }
    if !rule.constraint.is_interpreted() {
        out.push(Violation::UninterpretedInConstraint);
    }
    let mut symbols = rule.lhs.symbols();
    symbols.extend(rule.rhs.symbols());
    if let Some(m) = symbols.into_iter().find(Symbol::is_marked) {
        out.push(Violation::MarkedSymbol(m));
    }
    out
}

/// A constrained TRS. Rules are kept in input order; their index is their id.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Trs {
    pub rules: Vec<ConstrainedRule>,
}

impl Trs {
    pub fn new(rules: Vec<ConstrainedRule>) -> Trs {
        Trs { rules }
    }

    /// Root symbols of left-hand sides.
    pub fn defined_symbols(&self) -> BTreeSet<Symbol> {
        self.rules.iter().filter_map(|r| r.lhs.root().cloned()).collect()
    }

    /// Every uninterpreted symbol occurring in a rule.
    pub fn uninterpreted_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.extend(r.lhs.symbols());
            out.extend(r.rhs.symbols());
        }
        out.retain(|s| s.kind() == crate::term::SymbolKind::Uninterpreted);
        out
    }

    pub fn is_defined(&self, f: &Symbol) -> bool {
        self.rules.iter().any(|r| r.lhs.root() == Some(f))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SoundnessIssue {
    /// An interpreted-rooted rule whose right-hand side or left-hand side
    /// arguments leave `T(G_int, V)`.
    NotInterpreted { rule: usize },
    /// `constraint => lhs = rhs` is not valid.
    NotValid { rule: usize },
    /// The solver could not decide validity.
    Unverified { rule: usize },
}

impl fmt::Display for SoundnessIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SoundnessIssue::NotInterpreted { rule } => {
                write!(f, "rule {} mixes uninterpreted symbols into an interpreted rule", rule + 1)
            }
            SoundnessIssue::NotValid { rule } => {
                write!(f, "rule {} does not preserve the integer value", rule + 1)
            }
            SoundnessIssue::Unverified { rule } => {
                write!(f, "rule {} could not be verified value-preserving", rule + 1)
            }
        }
    }
}

/// Checks that every rule rooted by an interpreted symbol preserves its
/// value. Rules rooted in uninterpreted symbols pass vacuously.
pub fn check_local_soundness(trs: &Trs, cfg: &SolverConfig) -> Result<Vec<SoundnessIssue>> {
    let mut issues = Vec::new();
    for (i, rule) in trs.rules.iter().enumerate() {
        let Some(root) = rule.lhs.root() else { continue };
        if !root.is_interpreted() {
            continue;
        }
        if !rule.rhs.is_interpreted() || !rule.lhs.args().iter().all(Term::is_interpreted) {
            issues.push(SoundnessIssue::NotInterpreted { rule: i });
            continue;
        }
        let claim = Formula::implies(
            rule.constraint.clone(),
            Formula::atom(lia::Comparison::Eq, rule.lhs.clone(), rule.rhs.clone()),
        );
        match lia::is_valid(&claim, cfg)? {
            Truth::Yes => {}
            Truth::No => issues.push(SoundnessIssue::NotValid { rule: i }),
            Truth::Undetermined => issues.push(SoundnessIssue::Unverified { rule: i }),
        }
    }
    Ok(issues)
}

/// One rewrite step `t ->_{rule, position} term`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub term: Term,
    pub position: Position,
    pub rule: usize,
}

/// Whether `rule` applies to the ground term `t` at its root, and if so
/// the contractum.
pub fn apply_rule_at_root(rule: &ConstrainedRule, t: &Term) -> Option<Term> {
    let sigma = match_term(&rule.lhs, t)?;
    lia::holds_under(&rule.constraint, &sigma).then(|| rule.rhs.apply(&sigma))
}

/// All one-step successors of a ground term, in pre-order of positions and
/// then rule order.
pub fn rewrite_step(trs: &Trs, t: &Term) -> Vec<Step> {
    steps_filtered(trs, t, |_| true)
}

/// Successors obtained by rewriting strictly below the root.
pub fn rewrite_below_root(trs: &Trs, t: &Term) -> Vec<Step> {
    steps_filtered(trs, t, |p| !p.is_root())
}

fn steps_filtered(trs: &Trs, t: &Term, keep: impl Fn(&Position) -> bool) -> Vec<Step> {
    // positions are only materialized for candidate redexes; terms can be deep
    fn go(trs: &Trs, t: &Term, sub: &Term, path: &mut Vec<usize>, keep: &dyn Fn(&Position) -> bool, out: &mut Vec<Step>) {
        let Term::App(head, args) = sub else {
            return;
        };
        for (i, rule) in trs.rules.iter().enumerate() {
            if rule.lhs.root() != Some(head) {
                continue;
            }
            let pos = Position(path.clone());
            if !keep(&pos) {
                continue;
            }
            if let Some(contractum) = apply_rule_at_root(rule, sub) {
                let term = t.replace_at(&pos, contractum).expect("position taken from the term");
                out.push(Step { term, position: pos, rule: i });
            }
        }
        for (k, a) in args.iter().enumerate() {
            path.push(k + 1);
            go(trs, t, a, path, keep, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(trs, t, t, &mut Vec::new(), &keep, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// A normal form and the innermost-leftmost steps that reached it.
    Normal { term: Term, trace: Vec<(Position, usize)> },
    /// The step budget ran out; `term` is the last term reached.
    BudgetExhausted { term: Term, steps: usize },
}

/// Rewrites `t` innermost-leftmost until no rule applies or `budget` steps
/// have been taken.
pub fn normalize(trs: &Trs, t: &Term, budget: usize) -> Normalization {
    let mut cur = t.clone();
    let mut trace = Vec::new();
    loop {
        match innermost_redex(trs, &cur, &mut Vec::new()) {
            None => return Normalization::Normal { term: cur, trace },
            Some(_) if trace.len() >= budget => {
                return Normalization::BudgetExhausted {
                    term: cur,
                    steps: trace.len(),
                }
            }
            Some((pos, rule, contractum)) => {
                cur = cur.replace_at(&pos, contractum).expect("position taken from the term");
                trace.push((pos, rule));
            }
        }
    }
}

fn innermost_redex(trs: &Trs, t: &Term, path: &mut Vec<usize>) -> Option<(Position, usize, Term)> {
    for (i, a) in t.args().iter().enumerate() {
        path.push(i + 1);
        let found = innermost_redex(trs, a, path);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    t.root()?;
    trs.rules
        .iter()
        .enumerate()
        .find_map(|(i, rule)| apply_rule_at_root(rule, t).map(|c| (Position(path.clone()), i, c)))
}

/// `lhs# -> rhs# [constraint]` with a stable 1-based id.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DependencyPair {
    pub id: usize,
    pub lhs: Term,
    pub rhs: Term,
    pub constraint: Formula,
    /// Index of the rule the pair was taken from.
    pub rule: usize,
}

impl DependencyPair {
    pub fn lhs_root(&self) -> &Symbol {
        self.lhs.root().expect("pair sides are applications")
    }

    pub fn rhs_root(&self) -> &Symbol {
        self.rhs.root().expect("pair sides are applications")
    }

    /// The pair without its id, for shape comparisons.
    pub fn shape(&self) -> String {
        let mut s = format!("{} -> {}", self.lhs, self.rhs);
        if self.constraint != Formula::True {
            s.push_str(&format!(" [{}]", self.constraint));
        }
        s
    }
}

impl fmt::Display for DependencyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.id, self.shape())
    }
}

impl fmt::Debug for DependencyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One pair per defined-rooted subterm of each right-hand side, in rule
/// order and then pre-order; syntactic duplicates are kept once.
pub fn compute_dependency_pairs(trs: &Trs) -> Vec<DependencyPair> {
    let defined = trs.defined_symbols();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, rule) in trs.rules.iter().enumerate() {
        let Some(lhs) = rule.lhs.mark_root() else { continue };
        for (_, sub) in rule.rhs.subterms() {
            let Some(f) = sub.root() else { continue };
            if !defined.contains(f) {
                continue;
            }
            let rhs = sub.mark_root().expect("defined-rooted subterm");
            let key = (lhs.clone(), rhs.clone(), rule.constraint.clone());
            if !seen.insert(key) {
                continue;
            }
            out.push(DependencyPair {
                id: out.len() + 1,
                lhs: lhs.clone(),
                rhs,
                constraint: rule.constraint.clone(),
                rule: i,
            });
        }
    }
    out
}

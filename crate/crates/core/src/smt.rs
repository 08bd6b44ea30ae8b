//! SMT-LIB2 emission, a one-shot external solver client and model decoding.
//!
//! A [`ConstraintSystem`] is rendered into a complete script, piped into the
//! configured solver command, and the first status token plus the optional
//! `(get-model)` block are parsed back. The solver is killed when the
//! configured wall-clock budget runs out.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CmpOp {
    Eq,
    Gt,
    Ge,
    Lt,
    Le,
}

impl CmpOp {
    fn smt(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }

    pub fn holds(self, a: i128, b: i128) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
        }
    }
}

/// Integer/boolean expressions over named constants and bound variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i128),
    /// Integer-sorted symbol: a declared unknown or a `forall`-bound variable.
    Var(String),
    /// Boolean-sorted declared unknown.
    BoolVar(String),
    True,
    False,
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Forall(Vec<String>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bool_var(name: impl Into<String>) -> Expr {
        Expr::BoolVar(name.into())
    }

    pub fn add(mut terms: Vec<Expr>) -> Expr {
        terms.retain(|t| *t != Expr::Int(0));
        match terms.len() {
            0 => Expr::Int(0),
            1 => terms.pop().unwrap(),
            _ => Expr::Add(terms),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        if factors.contains(&Expr::Int(0)) {
            return Expr::Int(0);
        }
        let mut factors: Vec<Expr> = factors.into_iter().filter(|f| *f != Expr::Int(1)).collect();
        match factors.len() {
            0 => Expr::Int(1),
            1 => factors.pop().unwrap(),
            _ => Expr::Mul(factors),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b == Expr::Int(0) {
            return a;
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Int(x), Expr::Int(y)) => {
                if op.holds(*x, *y) {
                    Expr::True
                } else {
                    Expr::False
                }
            }
            _ => Expr::Cmp(op, Box::new(a), Box::new(b)),
        }
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::cmp(CmpOp::Eq, a, b)
    }

    pub fn gt(a: Expr, b: Expr) -> Expr {
        Expr::cmp(CmpOp::Gt, a, b)
    }

    pub fn ge(a: Expr, b: Expr) -> Expr {
        Expr::cmp(CmpOp::Ge, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        match e {
            Expr::True => Expr::False,
            Expr::False => Expr::True,
            e => Expr::Not(Box::new(e)),
        }
    }

    pub fn and(mut es: Vec<Expr>) -> Expr {
        if es.contains(&Expr::False) {
            return Expr::False;
        }
        es.retain(|e| *e != Expr::True);
        match es.len() {
            0 => Expr::True,
            1 => es.pop().unwrap(),
            _ => Expr::And(es),
        }
    }

    pub fn or(mut es: Vec<Expr>) -> Expr {
        if es.contains(&Expr::True) {
            return Expr::True;
        }
        es.retain(|e| *e != Expr::False);
        match es.len() {
            0 => Expr::False,
            1 => es.pop().unwrap(),
            _ => Expr::Or(es),
        }
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::True, _) => b,
            (Expr::False, _) | (_, Expr::True) => Expr::True,
            _ => Expr::Implies(Box::new(a), Box::new(b)),
        }
    }

    /// `forall vars. body`, dropping the binder when `vars` is empty.
    pub fn forall(vars: Vec<String>, body: Expr) -> Expr {
        if vars.is_empty() || matches!(body, Expr::True | Expr::False) {
            body
        } else {
            Expr::Forall(vars, Box::new(body))
        }
    }

    /// Free integer and boolean symbols (bound variables excluded).
    pub fn free_symbols(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut ints = BTreeSet::new();
        let mut bools = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut ints, &mut bools);
        (ints, bools)
    }

    fn collect_free(&self, bound: &mut Vec<String>, ints: &mut BTreeSet<String>, bools: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) | Expr::True | Expr::False => {}
            Expr::Var(v) => {
                if !bound.contains(v) {
                    ints.insert(v.clone());
                }
            }
            Expr::BoolVar(v) => {
                bools.insert(v.clone());
            }
            Expr::Add(es) | Expr::Mul(es) | Expr::And(es) | Expr::Or(es) => {
                es.iter().for_each(|e| e.collect_free(bound, ints, bools))
            }
            Expr::Sub(a, b) | Expr::Cmp(_, a, b) | Expr::Implies(a, b) => {
                a.collect_free(bound, ints, bools);
                b.collect_free(bound, ints, bools);
            }
            Expr::Not(e) => e.collect_free(bound, ints, bools),
            Expr::Forall(vs, body) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                body.collect_free(bound, ints, bools);
                bound.truncate(n);
            }
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_binders(&mut |vs| out.extend(vs.iter().cloned()));
        out
    }

    fn visit_binders(&self, f: &mut impl FnMut(&[String])) {
        match self {
            Expr::Forall(vs, body) => {
                f(vs);
                body.visit_binders(f);
            }
            Expr::Add(es) | Expr::Mul(es) | Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.visit_binders(f)),
            Expr::Sub(a, b) | Expr::Cmp(_, a, b) | Expr::Implies(a, b) => {
                a.visit_binders(f);
                b.visit_binders(f);
            }
            Expr::Not(e) => e.visit_binders(f),
            _ => {}
        }
    }

    pub fn is_quantified(&self) -> bool {
        !self.bound_vars().is_empty()
    }
}

/// Renders a symbol, quoting it when it is not a plain SMT-LIB simple symbol.
pub fn smt_symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, head: &str, es: &[Expr]) -> fmt::Result {
            write!(f, "({head}")?;
            for e in es {
                write!(f, " {e}")?;
            }
            f.write_str(")")
        }
        match self {
            Expr::Int(n) if *n < 0 => write!(f, "(- {})", n.unsigned_abs()),
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Var(v) | Expr::BoolVar(v) => f.write_str(&smt_symbol(v)),
            Expr::True => f.write_str("true"),
            Expr::False => f.write_str("false"),
            Expr::Add(es) => list(f, "+", es),
            Expr::Mul(es) => list(f, "*", es),
            Expr::Sub(a, b) => write!(f, "(- {a} {b})"),
            Expr::Cmp(op, a, b) => write!(f, "({} {a} {b})", op.smt()),
            Expr::Not(e) => write!(f, "(not {e})"),
            Expr::And(es) => list(f, "and", es),
            Expr::Or(es) => list(f, "or", es),
            Expr::Implies(a, b) => write!(f, "(=> {a} {b})"),
            Expr::Forall(vs, body) => {
                f.write_str("(forall (")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({} Int)", smt_symbol(v))?;
                }
                write!(f, ") {body})")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Logic {
    /// Quantifier-free validity/satisfiability checks.
    QfLia,
    /// Coefficient synthesis with universally quantified side conditions.
    Nia,
}

/// Unknowns plus assertions, rendered as a single script.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub logic: Logic,
    pub int_unknowns: BTreeSet<String>,
    pub bool_unknowns: BTreeSet<String>,
    pub assertions: Vec<Expr>,
    pub want_model: bool,
    /// Used to name dumped scripts.
    pub label: String,
}

impl ConstraintSystem {
    pub fn new(logic: Logic, label: impl Into<String>) -> ConstraintSystem {
        ConstraintSystem {
            logic,
            int_unknowns: BTreeSet::new(),
            bool_unknowns: BTreeSet::new(),
            assertions: Vec::new(),
            want_model: logic == Logic::Nia,
            label: label.into(),
        }
    }

    /// Satisfiability check of `e` over the given integer constants.
    pub fn validity_query(vars: impl IntoIterator<Item = String>, e: Expr) -> ConstraintSystem {
        let mut cs = ConstraintSystem::new(Logic::QfLia, "validity");
        cs.int_unknowns.extend(vars);
        cs.assertions.push(e);
        cs.want_model = false;
        cs
    }

    pub fn declare_int(&mut self, name: impl Into<String>) -> Expr {
        let name = name.into();
        self.int_unknowns.insert(name.clone());
        Expr::Var(name)
    }

    pub fn declare_bool(&mut self, name: impl Into<String>) -> Expr {
        let name = name.into();
        self.bool_unknowns.insert(name.clone());
        Expr::BoolVar(name)
    }

    pub fn assert(&mut self, e: Expr) {
        if e != Expr::True {
            self.assertions.push(e);
        }
    }

    pub fn quantified_assertions(&self) -> usize {
        self.assertions.iter().filter(|a| a.is_quantified()).count()
    }

    /// Checks that every free symbol is declared with the right sort and that
    /// no bound variable shadows an unknown.
    pub fn validate(&self) -> Result<()> {
        for a in &self.assertions {
            let (ints, bools) = a.free_symbols();
            if let Some(v) = ints.iter().find(|v| !self.int_unknowns.contains(*v)) {
                return Err(Error::UndeclaredSymbol(v.clone()));
            }
            if let Some(v) = bools.iter().find(|v| !self.bool_unknowns.contains(*v)) {
                return Err(Error::UndeclaredSymbol(v.clone()));
            }
            if let Some(v) = a
                .bound_vars()
                .into_iter()
                .find(|v| self.int_unknowns.contains(v) || self.bool_unknowns.contains(v))
            {
                return Err(Error::SolverProtocol(format!(
                    "bound variable `{v}` collides with an unknown"
                )));
            }
        }
        Ok(())
    }
}

/// Renders the script. Output depends only on the system's contents.
pub fn emit_smtlib(cs: &ConstraintSystem, force_logic: Option<&str>) -> Result<String> {
    cs.validate()?;
    let logic = force_logic.unwrap_or(match cs.logic {
        Logic::QfLia => "QF_LIA",
        Logic::Nia => "NIA",
    });
    let mut out = String::new();
    if cs.want_model {
        out.push_str("(set-option :produce-models true)\n");
    }
    writeln!(out, "(set-logic {logic})").unwrap();
    for v in &cs.int_unknowns {
        writeln!(out, "(declare-const {} Int)", smt_symbol(v)).unwrap();
    }
    for v in &cs.bool_unknowns {
        writeln!(out, "(declare-const {} Bool)", smt_symbol(v)).unwrap();
    }
    for a in &cs.assertions {
        writeln!(out, "(assert {a})").unwrap();
    }
    out.push_str("(check-sat)\n");
    if cs.want_model {
        out.push_str("(get-model)\n");
    }
    out.push_str("(exit)\n");
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i128),
    Bool(bool),
}

pub type Model = BTreeMap<String, Value>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    ProtocolError(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub model: Option<Model>,
    #[serde(serialize_with = "ser_secs")]
    pub wall_time: Duration,
}

fn ser_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Program and arguments; the script is written to its stdin.
    pub command: Vec<String>,
    pub timeout: Duration,
    pub dump_dir: Option<PathBuf>,
    /// Replaces the `set-logic` argument (e.g. `UFNIA`).
    pub force_logic: Option<String>,
    /// How many times an `unknown`/timeout answer is retried with a doubled
    /// budget.
    pub retries: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            command: vec!["z3".into(), "-in".into()],
            timeout: Duration::from_secs(300),
            dump_dir: None,
            force_logic: None,
            retries: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn command_line(&self) -> String {
        self.command.join(" ")
    }

    /// Checks that the solver binary can be spawned.
    pub fn probe(&self) -> Result<()> {
        let cs = ConstraintSystem::validity_query([], Expr::True);
        check(&cs, self).map(|_| ())
    }
}

static DUMP_SEQ: AtomicUsize = AtomicUsize::new(0);

/// Runs the solver on `cs`. Spawn failures are errors; everything the solver
/// says (or fails to say) is reported in the verdict's status.
pub fn check(cs: &ConstraintSystem, cfg: &SolverConfig) -> Result<Verdict> {
    let script = emit_smtlib(cs, cfg.force_logic.as_deref())?;
    if let Some(dir) = &cfg.dump_dir {
        std::fs::create_dir_all(dir)?;
        let seq = DUMP_SEQ.fetch_add(1, Ordering::Relaxed);
        let label: String = cs
            .label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        std::fs::write(dir.join(format!("{seq:05}-{label}.smt2")), &script)?;
    }
    let mut timeout = cfg.timeout;
    let mut attempt = 0;
    loop {
        let verdict = run_script(&script, cs, cfg, timeout)?;
        let retry = matches!(verdict.status, Status::Unknown | Status::Timeout) && attempt < cfg.retries;
        if !retry {
            return Ok(verdict);
        }
        attempt += 1;
        timeout *= 2;
    }
}

fn run_script(script: &str, cs: &ConstraintSystem, cfg: &SolverConfig, timeout: Duration) -> Result<Verdict> {
    let (program, args) = cfg
        .command
        .split_first()
        .ok_or_else(|| Error::SolverProtocol("empty solver command".into()))?;
    let start = Instant::now();
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|source| Error::SolverSpawn {
            command: cfg.command_line(),
            source,
        })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let payload = script.to_owned();
    let writer = std::thread::spawn(move || {
        // the solver may exit early on errors; a broken pipe is not ours to report
        let _ = stdin.write_all(payload.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });

    let deadline = start + timeout;
    let mut timed_out = false;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            timed_out = true;
            break;
        }
        std::thread::sleep(Duration::from_millis(2));
    }
    let _ = writer.join();
    let output = reader.join().unwrap_or_default();
    let wall_time = start.elapsed();

    if timed_out {
        return Ok(Verdict {
            status: Status::Timeout,
            model: None,
            wall_time,
        });
    }
    let (status, model) = parse_answer(&output, cs);
    Ok(Verdict {
        status,
        model,
        wall_time,
    })
}

/// Parses the solver's reply: a status token, optionally followed by a model.
/// Unknowns the solver left out of the model are unconstrained and are
/// completed with `0`/`false`.
pub fn parse_answer(output: &str, cs: &ConstraintSystem) -> (Status, Option<Model>) {
    let mut tokens = match parse_sexps(output) {
        Ok(t) => t.into_iter(),
        Err(e) => return (Status::ProtocolError(e), None),
    };
    let status = match tokens.next() {
        Some(Sexp::Atom(a)) if a == "sat" => Status::Sat,
        Some(Sexp::Atom(a)) if a == "unsat" => return (Status::Unsat, None),
        Some(Sexp::Atom(a)) if a == "unknown" => return (Status::Unknown, None),
        Some(other) => return (Status::ProtocolError(format!("unexpected solver output `{other}`")), None),
        None => return (Status::ProtocolError("empty solver output".into()), None),
    };
    if !cs.want_model {
        return (status, None);
    }
    let mut model = match tokens.next() {
        Some(block) => match decode_model(&block) {
            Ok(m) => m,
            Err(e) => return (Status::ProtocolError(e), None),
        },
        None => return (Status::ProtocolError("sat answer without a model".into()), None),
    };
    for v in &cs.int_unknowns {
        model.entry(v.clone()).or_insert(Value::Int(0));
    }
    for v in &cs.bool_unknowns {
        model.entry(v.clone()).or_insert(Value::Bool(false));
    }
    (status, Some(model))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn parse_sexps(input: &str) -> std::result::Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = input.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                let list = stack.pop().ok_or("unbalanced `)`")?;
                stack.last_mut().ok_or("unbalanced `)`")?.push(Sexp::List(list));
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' | '|' => {
                let mut atom = String::from(c);
                for d in chars.by_ref() {
                    atom.push(d);
                    if d == c {
                        break;
                    }
                }
                stack.last_mut().unwrap().push(Sexp::Atom(atom));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut atom = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' {
                        break;
                    }
                    atom.push(d);
                    chars.next();
                }
                stack.last_mut().unwrap().push(Sexp::Atom(atom));
            }
        }
        if stack.is_empty() {
            return Err("unbalanced `)`".into());
        }
    }
    if stack.len() != 1 {
        return Err("unterminated list".into());
    }
    Ok(stack.pop().unwrap())
}

fn decode_value(e: &Sexp) -> std::result::Result<Value, String> {
    match e {
        Sexp::Atom(a) if a == "true" => Ok(Value::Bool(true)),
        Sexp::Atom(a) if a == "false" => Ok(Value::Bool(false)),
        Sexp::Atom(a) => a.parse().map(Value::Int).map_err(|_| format!("bad literal `{a}`")),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(m), inner] if m == "-" => match decode_value(inner)? {
                Value::Int(n) => Ok(Value::Int(-n)),
                Value::Bool(_) => Err(format!("bad literal `{e}`")),
            },
            _ => Err(format!("unsupported model value `{e}`")),
        },
    }
}

fn unquote(name: &str) -> String {
    name.strip_prefix('|')
        .and_then(|n| n.strip_suffix('|'))
        .unwrap_or(name)
        .to_string()
}

fn decode_model(block: &Sexp) -> std::result::Result<Model, String> {
    let Sexp::List(entries) = block else {
        return Err(format!("expected a model block, found `{block}`"));
    };
    let mut entries = entries.as_slice();
    // older solvers wrap the block as (model ...)
    if let Some(Sexp::Atom(head)) = entries.first() {
        if head == "model" {
            entries = &entries[1..];
        }
    }
    let mut model = Model::new();
    for entry in entries {
        match entry {
            Sexp::List(xs) => match xs.as_slice() {
                [Sexp::Atom(df), Sexp::Atom(name), Sexp::List(params), _sort, value]
                    if df == "define-fun" && params.is_empty() =>
                {
                    model.insert(unquote(name), decode_value(value)?);
                }
                // function definitions with parameters are not ours
                [Sexp::Atom(df), ..] if df == "define-fun" => {}
                _ => return Err(format!("unsupported model entry `{entry}`")),
            },
            Sexp::Atom(a) => return Err(format!("unexpected `{a}` in model")),
        }
    }
    Ok(model)
}

/// Evaluates expressions under a model, checking `forall` binders over a
/// finite grid. Used to double-check solver models independently of the
/// solver.
pub struct GridEvaluator<'a> {
    model: &'a Model,
    grid: std::ops::RangeInclusive<i64>,
}

impl<'a> GridEvaluator<'a> {
    pub fn new(model: &'a Model, grid: std::ops::RangeInclusive<i64>) -> Self {
        GridEvaluator { model, grid }
    }

    pub fn holds(&self, e: &Expr) -> Result<bool> {
        self.bool_with(e, &mut HashMap::new())
    }

    fn int_with(&self, e: &Expr, env: &mut HashMap<String, i128>) -> Result<i128> {
        let overflow = || Error::Overflow(e.to_string());
        Ok(match e {
            Expr::Int(n) => *n,
            Expr::Var(v) => match env.get(v) {
                Some(n) => *n,
                None => match self.model.get(v) {
                    Some(Value::Int(n)) => *n,
                    _ => return Err(Error::UndeclaredSymbol(v.clone())),
                },
            },
            Expr::Add(es) => {
                let mut acc: i128 = 0;
                for x in es {
                    acc = acc.checked_add(self.int_with(x, env)?).ok_or_else(overflow)?;
                }
                acc
            }
            Expr::Mul(es) => {
                let mut acc: i128 = 1;
                for x in es {
                    acc = acc.checked_mul(self.int_with(x, env)?).ok_or_else(overflow)?;
                }
                acc
            }
            Expr::Sub(a, b) => self
                .int_with(a, env)?
                .checked_sub(self.int_with(b, env)?)
                .ok_or_else(overflow)?,
            _ => return Err(Error::SolverProtocol(format!("`{e}` is not an integer term"))),
        })
    }

    fn bool_with(&self, e: &Expr, env: &mut HashMap<String, i128>) -> Result<bool> {
        Ok(match e {
            Expr::True => true,
            Expr::False => false,
            Expr::BoolVar(v) => match self.model.get(v) {
                Some(Value::Bool(b)) => *b,
                _ => return Err(Error::UndeclaredSymbol(v.clone())),
            },
            Expr::Cmp(op, a, b) => op.holds(self.int_with(a, env)?, self.int_with(b, env)?),
            Expr::Not(x) => !self.bool_with(x, env)?,
            Expr::And(es) => {
                for x in es {
                    if !self.bool_with(x, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Expr::Or(es) => {
                for x in es {
                    if self.bool_with(x, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            Expr::Implies(a, b) => !self.bool_with(a, env)? || self.bool_with(b, env)?,
            Expr::Forall(vs, body) => self.forall(vs, body, env)?,
            _ => return Err(Error::SolverProtocol(format!("`{e}` is not a formula"))),
        })
    }

    fn forall(&self, vs: &[String], body: &Expr, env: &mut HashMap<String, i128>) -> Result<bool> {
        let Some((v, rest)) = vs.split_first() else {
            return self.bool_with(body, env);
        };
        let saved = env.get(v).copied();
        let mut ok = true;
        for n in self.grid.clone() {
            env.insert(v.clone(), n as i128);
            if !self.forall(rest, body, env)? {
                ok = false;
                break;
            }
        }
        match saved {
            Some(old) => env.insert(v.clone(), old),
            None => env.remove(v),
        };
        Ok(ok)
    }
}

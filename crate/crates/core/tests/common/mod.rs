#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use ctrs_core::dp::DpProblem;
use ctrs_core::rules::Trs;
use ctrs_core::smt::SolverConfig;
use ctrs_core::syntax::parse_ctrs;
use ctrs_core::term::{Symbol, Term};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_source(name: &str) -> String {
    let path = corpus_dir().join(format!("{name}.ctrs"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn system(name: &str) -> Arc<Trs> {
    Arc::new(parse_ctrs(&corpus_source(name)).expect("corpus fixtures parse").trs())
}

pub fn system_from(text: &str) -> Arc<Trs> {
    Arc::new(parse_ctrs(text).expect("test system parses").trs())
}

pub fn initial(name: &str) -> DpProblem {
    DpProblem::initial(system(name))
}

pub const SYSTEMS: [&str; 7] = ["R1", "R1p", "R2", "R2p", "R3", "R3p", "R3pp"];

pub fn solver() -> SolverConfig {
    SolverConfig::default().with_timeout(Duration::from_secs(60))
}

pub fn f(t: Term) -> Term {
    Term::app(Symbol::uninterpreted("f", 1), vec![t])
}

pub fn s(t: Term) -> Term {
    Term::succ(t)
}

pub fn p(t: Term) -> Term {
    Term::pred(t)
}

pub fn x() -> Term {
    Term::var("x")
}

pub fn ids(xs: &[usize]) -> std::collections::BTreeSet<usize> {
    xs.iter().copied().collect()
}

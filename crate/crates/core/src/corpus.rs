//! Loading systems from disk and running the system-by-processor matrix.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::dp::{run_framework, Budget, NodeStatus, ProcessorKind, ProofTree, Strategy, Verdict};
use crate::error::{Error, Result};
use crate::interp::{PiSettings, SignScope};
use crate::rules::{check_local_soundness, SoundnessIssue, Trs};
use crate::smt::SolverConfig;
use crate::syntax::{parse_ctrs, CtrsDocument};

/// Parses `text` and checks local soundness of the interpreted rules.
/// Rules whose soundness the solver cannot decide are rejected unless
/// `allow_unverified` is set.
pub fn load_system(text: &str, cfg: &SolverConfig, allow_unverified: bool) -> Result<(CtrsDocument, Trs)> {
    let doc = parse_ctrs(text)?;
    let trs = doc.trs();
    for issue in check_local_soundness(&trs, cfg)? {
        if allow_unverified && matches!(issue, SoundnessIssue::Unverified { .. }) {
            continue;
        }
        return Err(Error::Unsound(issue.to_string()));
    }
    Ok((doc, trs))
}

/// Expected result of one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Success,
    Failure,
    /// The reference run timed out; timeout, unknown and failure all match.
    Timeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellResult {
    Success,
    /// Every processor answered but none made progress.
    Failure,
    Timeout,
    Unknown,
    Error,
}

impl CellResult {
    pub fn as_str(self) -> &'static str {
        match self {
            CellResult::Success => "success",
            CellResult::Failure => "failure",
            CellResult::Timeout => "timeout",
            CellResult::Unknown => "unknown",
            CellResult::Error => "error",
        }
    }

    pub fn matches(self, e: Expected) -> bool {
        match e {
            Expected::Success => self == CellResult::Success,
            Expected::Failure => self == CellResult::Failure,
            Expected::Timeout => matches!(self, CellResult::Timeout | CellResult::Unknown | CellResult::Failure),
        }
    }
}

/// Rows are systems, columns are processors; each cell runs the SCC
/// processor followed by the column's processor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedTable {
    pub columns: Vec<ProcessorKind>,
    pub rows: Vec<(String, Vec<Expected>)>,
}

impl ExpectedTable {
    /// Whitespace-separated table; the first non-comment line is the header
    /// `system <processor>..`.
    pub fn parse(text: &str) -> Result<ExpectedTable> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split(';').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, msg: String| Error::Parse { line, col: 1, msg };
        let Some((hline, header)) = lines.next() else {
            return Ok(ExpectedTable {
                columns: Vec::new(),
                rows: Vec::new(),
            });
        };
        let mut words = header.split_whitespace();
        if words.next() != Some("system") {
            return Err(bad(hline, "header must start with `system`".into()));
        }
        let columns = words
            .map(|w| w.parse::<ProcessorKind>().map_err(|e| bad(hline, e)))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for (line, l) in lines {
            let mut words = l.split_whitespace();
            let name = words.next().expect("nonempty line").to_string();
            let cells = words
                .map(|w| match w {
                    "success" => Ok(Expected::Success),
                    "failure" => Ok(Expected::Failure),
                    "timeout" => Ok(Expected::Timeout),
                    other => Err(bad(line, format!("unknown expectation `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            if cells.len() != columns.len() {
                return Err(bad(line, format!("expected {} cells, found {}", columns.len(), cells.len())));
            }
            rows.push((name, cells));
        }
        Ok(ExpectedTable { columns, rows })
    }
}

#[derive(Clone, Debug)]
pub struct CorpusConfig {
    /// Wall-clock budget per cell; also caps each solver call.
    pub cell_timeout: Duration,
    pub solver: SolverConfig,
    pub sign_scope: SignScope,
    pub max_iterations: usize,
    /// Worker threads; 0 picks the default.
    pub jobs: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            cell_timeout: Duration::from_secs(300),
            solver: SolverConfig::default(),
            sign_scope: SignScope::default(),
            max_iterations: Budget::default().max_iterations,
            jobs: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub system: String,
    pub processor: String,
    pub result: CellResult,
    pub detail: String,
    pub wall_time_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
    #[serde(skip)]
    pub tree: Option<ProofTree>,
}

impl Cell {
    pub fn matches(&self) -> bool {
        self.expected.is_none_or(|e| self.result.matches(e))
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorpusReport {
    pub cells: Vec<Cell>,
    pub mismatches: Vec<String>,
}

impl CorpusReport {
    pub fn cell(&self, system: &str, processor: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.system == system && c.processor == processor)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn render_table(&self) -> String {
        let mut columns: Vec<&str> = Vec::new();
        let mut systems: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !columns.contains(&c.processor.as_str()) {
                columns.push(&c.processor);
            }
            if !systems.contains(&c.system.as_str()) {
                systems.push(&c.system);
            }
        }
        let mut out = String::new();
        let _ = write!(out, "{:<8}", "system");
        for col in &columns {
            let _ = write!(out, " {col:<16}");
        }
        let _ = writeln!(out);
        for s in &systems {
            let _ = write!(out, "{s:<8}");
            for col in &columns {
                let text = match self.cell(s, col) {
                    Some(c) => format!("{}{}", c.result.as_str(), if c.matches() { "" } else { "!" }),
                    None => "-".into(),
                };
                let _ = write!(out, " {text:<16}");
            }
            let _ = writeln!(out);
        }
        for m in &self.mismatches {
            let _ = writeln!(out, "mismatch: {m}");
        }
        out
    }
}

/// Systems are `<dir>/<name>.ctrs`. With `<dir>/expected.txt` the matrix is
/// the table's rows and columns; otherwise every system is run against
/// every PI processor of the default strategy, without expectations.
pub fn run_corpus(dir: &Path, cfg: &CorpusConfig) -> Result<CorpusReport> {
    let expected_path = dir.join("expected.txt");
    let table = if expected_path.exists() {
        ExpectedTable::parse(&std::fs::read_to_string(&expected_path)?)?
    } else {
        let mut names: Vec<String> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "ctrs"))
            .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .collect();
        names.sort();
        let columns: Vec<ProcessorKind> = Strategy::default()
            .0
            .into_iter()
            .filter(|k| *k != ProcessorKind::Scc)
            .collect();
        ExpectedTable {
            rows: names.into_iter().map(|n| (n, Vec::new())).collect(),
            columns,
        }
    };

    let mut jobs: Vec<(String, PathBuf, ProcessorKind, Option<Expected>)> = Vec::new();
    for (name, cells) in &table.rows {
        for (i, col) in table.columns.iter().enumerate() {
            jobs.push((name.clone(), dir.join(format!("{name}.ctrs")), *col, cells.get(i).copied()));
        }
    }
    let run = || -> Vec<Cell> {
        jobs.par_iter()
            .map(|(name, path, col, exp)| {
                let mut cell = run_cell(path, *col, cfg);
                cell.system = name.clone();
                cell.expected = *exp;
                cell
            })
            .collect()
    };
    let cells = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .expect("thread pool")
            .install(run)
    } else {
        run()
    };
    let mismatches = cells
        .iter()
        .filter(|c| !c.matches())
        .map(|c| {
            format!(
                "{} x {}: got {} ({}), expected {:?}",
                c.system,
                c.processor,
                c.result.as_str(),
                c.detail,
                c.expected.expect("only cells with expectations mismatch")
            )
        })
        .collect();
    Ok(CorpusReport { cells, mismatches })
}

/// Runs `scc` then `col` on the system at `path` within the cell budget.
pub fn run_cell(path: &Path, col: ProcessorKind, cfg: &CorpusConfig) -> Cell {
    let start = Instant::now();
    let deadline = start + cfg.cell_timeout;
    let solver = cfg.solver.clone().with_timeout(cfg.solver.timeout.min(cfg.cell_timeout));
    let mut cell = Cell {
        system: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        processor: col.to_string(),
        result: CellResult::Error,
        detail: String::new(),
        wall_time_secs: 0.0,
        expected: None,
        tree: None,
    };
    let outcome = std::fs::read_to_string(path)
        .map_err(Error::from)
        .and_then(|text| load_system(&text, &solver, false))
        .and_then(|(_, trs)| {
            let settings = PiSettings {
                solver,
                sign_scope: cfg.sign_scope,
                ..PiSettings::default()
            };
            let budget = Budget {
                max_iterations: cfg.max_iterations,
                deadline: Some(deadline),
            };
            run_framework(Arc::new(trs), &Strategy(vec![ProcessorKind::Scc, col]), &settings, budget)
        });
    cell.wall_time_secs = start.elapsed().as_secs_f64();
    match outcome {
        Err(e) => cell.detail = e.to_string(),
        Ok(tree) => {
            (cell.result, cell.detail) = classify(&tree);
            cell.tree = Some(tree);
        }
    }
    cell
}

fn classify(tree: &ProofTree) -> (CellResult, String) {
    if tree.verdict == Verdict::Proved {
        let n = tree.nodes.iter().filter(|n| n.application.is_some()).count();
        return (CellResult::Success, format!("{n} processor applications"));
    }
    let stuck = tree
        .nodes
        .iter()
        .find(|n| matches!(n.status, NodeStatus::Unresolved | NodeStatus::Open))
        .expect("unproved trees have an open node");
    let statuses: Vec<&str> = stuck
        .attempts
        .iter()
        .filter_map(|a| a.solver.as_ref().map(|s| s.status.as_str()))
        .collect();
    let note = stuck
        .attempts
        .iter()
        .rev()
        .find_map(|a| a.note.clone())
        .unwrap_or_else(|| "budget exhausted".into());
    let result = if stuck.status == NodeStatus::Open || statuses.contains(&"timeout") {
        CellResult::Timeout
    } else if statuses.contains(&"unknown") {
        CellResult::Unknown
    } else {
        CellResult::Failure
    };
    (result, note)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{Mode, Variant};

    #[test]
    fn table_parses() {
        let t = ExpectedTable::parse("; c\nsystem legacy pi:gt-ge-ge\nR2 success timeout\n").unwrap();
        assert_eq!(
            t.columns,
            vec![ProcessorKind::Pi(Mode::Legacy), ProcessorKind::Pi(Mode::Variant(Variant::GtGeGe))]
        );
        assert_eq!(t.rows, vec![("R2".to_string(), vec![Expected::Success, Expected::Timeout])]);
        assert!(ExpectedTable::parse("system legacy\nR1 success failure\n").is_err());
    }

    #[test]
    fn timeout_expectation_accepts_non_success() {
        for r in [CellResult::Timeout, CellResult::Unknown, CellResult::Failure] {
            assert!(r.matches(Expected::Timeout));
        }
        assert!(!CellResult::Success.matches(Expected::Timeout));
        assert!(!CellResult::Timeout.matches(Expected::Failure));
    }
}

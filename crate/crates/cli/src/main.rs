use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use ctrs_core::corpus::{load_system, run_corpus, CorpusConfig};
use ctrs_core::dp::{run_framework, Budget, Strategy};
use ctrs_core::interp::{PiSettings, PinnedModel, PinnedQueue, SignScope};
use ctrs_core::report::{Outcome, RunReport};
use ctrs_core::smt::SolverConfig;
use ctrs_core::Error;

/// Termination prover for constrained rewrite systems over integer
/// arithmetic.
#[derive(Parser)]
#[command(name = "ctrs-prove", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Try to prove termination of one system.
    Prove(ProveArgs),
    /// Run every system of a directory against every processor and compare
    /// with `expected.txt`.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Solver command line; the query is written to its standard input.
    #[arg(long, default_value = "z3 -in")]
    solver_cmd: String,
    /// Write every solver query to this directory.
    #[arg(long, value_name = "DIR")]
    emit_smt: Option<PathBuf>,
    /// Sign condition on marked coefficients: `all` positions or only
    /// `reducible` ones.
    #[arg(long, default_value = "all")]
    sign_scope: SignScope,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

impl SolverArgs {
    fn solver(&self, timeout: Duration) -> anyhow::Result<SolverConfig> {
        let command: Vec<String> = self.solver_cmd.split_whitespace().map(String::from).collect();
        anyhow::ensure!(!command.is_empty(), "--solver-cmd is empty");
        Ok(SolverConfig {
            command,
            timeout,
            dump_dir: self.emit_smt.clone(),
            ..SolverConfig::default()
        })
    }
}

#[derive(Args)]
struct ProveArgs {
    file: PathBuf,
    /// Comma-separated processors: scc, legacy, pi:gt-ge-ge, pi:gt-le-le,
    /// pi:lt-ge-le, pi:lt-le-ge.
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Overall time budget; also caps each solver call.
    #[arg(long, default_value_t = 300)]
    timeout_secs: u64,
    /// Use the interpretations in FILE, in order, instead of synthesizing.
    #[arg(long, value_name = "FILE")]
    pin_model: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Restrict synthesized coefficients to [-B, B].
    #[arg(long, value_name = "B")]
    coefficient_bound: Option<u64>,
    /// Accept rules whose local soundness the solver cannot decide.
    #[arg(long)]
    allow_unverified: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct CorpusArgs {
    dir: PathBuf,
    /// Time budget per cell.
    #[arg(long, default_value_t = 300)]
    timeout_secs: u64,
    /// Parallel cells; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Prove(args) => prove(&args),
        Command::Corpus(args) => corpus(&args),
    };
    ExitCode::from(code)
}

fn system_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn prove(args: &ProveArgs) -> u8 {
    let strategy = args.strategy.clone().unwrap_or_default();
    let report = match run_prove(args, &strategy) {
        Ok(r) => r,
        Err(e) => RunReport::input_error(&system_name(&args.file), &strategy.to_string(), format!("{e:#}")),
    };
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.render_text());
    }
    report.exit_code() as u8
}

fn run_prove(args: &ProveArgs, strategy: &Strategy) -> anyhow::Result<RunReport> {
    let timeout = Duration::from_secs(args.timeout_secs);
    let deadline = Instant::now() + timeout;
    let solver = args.solver.solver(timeout)?;
    solver.probe().map_err(explain_spawn)?;
    let text = std::fs::read_to_string(&args.file).with_context(|| format!("cannot read {}", args.file.display()))?;
    let (_, trs) = load_system(&text, &solver, args.allow_unverified)?;
    let pinned = match &args.pin_model {
        Some(path) => Some(PinnedQueue::new(
            PinnedModel::load(path).with_context(|| format!("cannot load {}", path.display()))?,
        )),
        None => None,
    };
    let settings = PiSettings {
        solver,
        sign_scope: args.solver.sign_scope,
        coefficient_bound: args.coefficient_bound,
        pinned,
    };
    let budget = Budget {
        max_iterations: args.solver.max_iterations,
        deadline: Some(deadline),
    };
    let tree = run_framework(Arc::new(trs), strategy, &settings, budget)?;
    Ok(RunReport::from_tree(&system_name(&args.file), &strategy.to_string(), tree))
}

fn explain_spawn(e: Error) -> anyhow::Error {
    match e {
        Error::SolverSpawn { command, source } => anyhow::anyhow!(
            "cannot run the SMT solver `{command}` ({source}); install z3 and put it on PATH, or pass --solver-cmd"
        ),
        other => other.into(),
    }
}

fn corpus(args: &CorpusArgs) -> u8 {
    let result = (|| -> anyhow::Result<_> {
        let timeout = Duration::from_secs(args.timeout_secs);
        let solver = args.solver.solver(timeout)?;
        solver.probe().map_err(explain_spawn)?;
        let cfg = CorpusConfig {
            cell_timeout: timeout,
            solver,
            sign_scope: args.solver.sign_scope,
            max_iterations: args.solver.max_iterations,
            jobs: args.jobs,
        };
        Ok(run_corpus(&args.dir, &cfg)?)
    })();
    match result {
        Ok(report) => {
            if args.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_table());
            }
            if report.mismatches.is_empty() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            Outcome::InputError.exit_code() as u8
        }
    }
}

//! `harmonious`: enumerate free trees, label them, and check the labels.
//!
//! Exit codes: 0 success, 1 a solver or verification failure, 2 bad usage,
//! malformed input or an I/O error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use harmonious_core::backtrack::MAX_SOLVER_NODES;
use harmonious_core::certificate::{verify_stream, Certificate, ReadIssue};
use harmonious_core::config::{parse_order, SolverConfig, SolverKind, DEFAULT_SEED};
use harmonious_core::enumerate::{count_free_trees_enumerated, free_trees, oracle_count_otter};
use harmonious_core::exhaustive::EXHAUSTIVE_MAX;
use harmonious_core::hybrid::{run_solver, solve_hybrid};
use harmonious_core::labelling::normalize;
use harmonious_core::outcome::SolveOutcome;
use harmonious_core::sweep::{sweep, SweepOptions, DEFAULT_BLOCK_SIZE};
use harmonious_core::tree::{LevelSequence, Tree};

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "harmonious", version, about = "Harmonious labellings of free trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print canonical level sequences of all free trees on N nodes.
    Gen {
        #[arg(long)]
        nodes: usize,
        /// Print only the number of trees.
        #[arg(long)]
        count_only: bool,
    },
    /// Label one tree and print its certificate.
    Solve {
        /// Comma-separated depths, root first, e.g. 0,1,2,1
        #[arg(long)]
        levels: String,
        /// twostage, backtrack, tabu, exhaustive or hybrid.
        #[arg(long, default_value = "hybrid")]
        solver: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Label every tree in a size range, with checkpointing.
    Sweep {
        #[arg(long)]
        min: usize,
        #[arg(long)]
        max: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Certificate file (JSON lines).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Per-size reports are appended here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Ignore any existing checkpoint and start over.
        #[arg(long)]
        fresh: bool,
        #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
        block_size: usize,
        /// Stop after this many blocks, leaving a resumable checkpoint.
        #[arg(long, hide = true)]
        stop_after_blocks: Option<u64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Re-check every certificate in a file.
    Verify { path: PathBuf },
    /// Compare the enumerated tree count with the counting formula.
    Count {
        #[arg(long)]
        nodes: usize,
    },
}

/// Solver settings. A `--config` file is applied first, flags override it.
#[derive(Args)]
struct ConfigArgs {
    /// File of key=value lines using the flag names with underscores.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    backtrack_limit: Option<u64>,
    #[arg(long)]
    restarts: Option<u32>,
    #[arg(long)]
    perturbation: Option<f64>,
    #[arg(long)]
    sample_pairs: Option<usize>,
    #[arg(long)]
    tenure: Option<u64>,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    twostage_runs: Option<u32>,
    #[arg(long)]
    stage1_budget: Option<u64>,
    #[arg(long)]
    stage2_budget: Option<u64>,
    /// Pipeline order, e.g. twostage,backtrack,tabu
    #[arg(long)]
    order: Option<String>,
}

impl ConfigArgs {
    fn build(&self, seed: u64) -> Result<SolverConfig, String> {
        let mut cfg = SolverConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            cfg.apply_file(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        let overrides = [
            ("backtrack_limit", self.backtrack_limit.map(|v| v.to_string())),
            ("restarts", self.restarts.map(|v| v.to_string())),
            ("perturbation", self.perturbation.map(|v| v.to_string())),
            ("sample_pairs", self.sample_pairs.map(|v| v.to_string())),
            ("tenure", self.tenure.map(|v| v.to_string())),
            ("max_iters", self.max_iters.map(|v| v.to_string())),
            ("twostage_runs", self.twostage_runs.map(|v| v.to_string())),
            ("stage1_budget", self.stage1_budget.map(|v| v.to_string())),
            ("stage2_budget", self.stage2_budget.map(|v| v.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                cfg.set(key, &value).map_err(|e| e.to_string())?;
            }
        }
        if let Some(order) = &self.order {
            cfg.order = parse_order(order).map_err(|e| e.to_string())?;
        }
        cfg.global_seed = seed;
        Ok(cfg)
    }
}

fn check_nodes(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_SOLVER_NODES {
        return Err(format!("node count must be in 1..={MAX_SOLVER_NODES}, got {n}"));
    }
    Ok(())
}

fn run_gen(n: usize, count_only: bool) -> Result<u8, String> {
    check_nodes(n)?;
    if count_only {
        println!("{}", count_free_trees_enumerated(n));
        return Ok(OK);
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for seq in free_trees(n) {
        if writeln!(out, "{seq}").is_err() {
            // closed pipe, e.g. `| head`
            return Ok(OK);
        }
    }
    let _ = out.flush();
    Ok(OK)
}

fn run_count(n: usize) -> Result<u8, String> {
    check_nodes(n)?;
    let enumerated = count_free_trees_enumerated(n) as u128;
    let formula = oracle_count_otter(n);
    println!("enumerated={enumerated} formula={formula}");
    Ok(if enumerated == formula { OK } else { FAILED })
}

fn run_solve(levels: &str, solver: &str, seed: u64, cfg: &SolverConfig) -> Result<u8, String> {
    let seq: LevelSequence = levels.parse().map_err(|e| format!("bad level sequence: {e}"))?;
    check_nodes(seq.len())?;
    let tree = Tree::from_level_sequence(&seq);
    let outcome = if solver == "hybrid" {
        solve_hybrid(&tree, cfg, seed)
    } else {
        let kind: SolverKind = solver.parse()?;
        if kind == SolverKind::Exhaustive && tree.len() > EXHAUSTIVE_MAX {
            return Err(format!("exhaustive search is limited to {EXHAUSTIVE_MAX} nodes"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut outcome = run_solver(kind, &tree, cfg, &mut rng);
        outcome.labelling = outcome
            .labelling
            .map(|f| normalize(&tree, &f).expect("solvers return verified labellings"));
        outcome
    };
    print_outcome(&seq, &outcome, seed);
    Ok(if outcome.is_success() { OK } else { FAILED })
}

fn print_outcome(seq: &LevelSequence, outcome: &SolveOutcome, seed: u64) {
    match (&outcome.labelling, outcome.solver) {
        (Some(f), Some(solver)) => println!("{}", Certificate::new(seq, f, solver, seed).to_line()),
        _ => {
            let record = json!({
                "n": seq.len(),
                "levels": seq.as_slice(),
                "status": "failed",
                "seed": seed,
                "attempts": outcome.attempts,
            });
            println!("{record}");
        }
    }
}

fn run_verify(path: &PathBuf) -> Result<u8, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match verify_stream(BufReader::new(file)) {
        Ok(summary) => {
            if summary.records == 0 {
                eprintln!("warning: {} holds no certificates", path.display());
            }
            println!("verified={}", summary.records);
            Ok(OK)
        }
        Err(ReadIssue::Invalid { line, violation }) => {
            eprintln!("{}:{line}: {violation}", path.display());
            println!("failed line={line} reason=\"{}\"", violation.code());
            Ok(FAILED)
        }
        Err(ReadIssue::Malformed { line, reason }) => {
            Err(format!("{}:{line}: malformed record: {reason}", path.display()))
        }
        Err(ReadIssue::Io(e)) => Err(format!("{}: {e}", path.display())),
    }
}

fn run(command: Command) -> Result<u8, String> {
    match command {
        Command::Gen { nodes, count_only } => run_gen(nodes, count_only),
        Command::Count { nodes } => run_count(nodes),
        Command::Solve {
            levels,
            solver,
            seed,
            config,
        } => run_solve(&levels, &solver, seed, &config.build(seed)?),
        Command::Verify { path } => run_verify(&path),
        Command::Sweep {
            min,
            max,
            jobs,
            seed,
            out,
            checkpoint,
            report,
            fresh,
            block_size,
            stop_after_blocks,
            config,
        } => {
            let cfg = config.build(seed)?;
            let opts = SweepOptions {
                workers: jobs,
                block_size,
                report,
                fresh,
                stop_after_blocks,
                ..SweepOptions::new(min, max, out, checkpoint)
            };
            let outcome = sweep(&cfg, &opts).map_err(|e| e.to_string())?;
            for report in &outcome.reports {
                println!("{}", serde_json::to_string(report).expect("report serializes"));
            }
            let mut failed = false;
            for levels in outcome.failures() {
                eprintln!("candidate counterexample: {levels}");
                failed = true;
            }
            if outcome.interrupted {
                eprintln!("stopped early; rerun to resume from the checkpoint");
            }
            Ok(if failed { FAILED } else { OK })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(USAGE)
        }
    }
}

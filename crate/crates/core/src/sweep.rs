//! Parallel, checkpointed sweep over every free tree in a size range.
//!
//! For each `n` the tree stream is cut into contiguous blocks. Workers solve
//! whole blocks; the calling thread owns the results file and writes blocks
//! strictly in stream order through a small reorder buffer. After each block
//! the results are flushed and the checkpoint is replaced atomically, so a
//! crash leaves at worst some results past the checkpoint, which are cut off
//! on resume.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use crossbeam_channel::bounded;
use serde::Serialize;

use crate::certificate::Certificate;
use crate::config::{SolverConfig, SolverKind};
use crate::enumerate::{free_trees, skip, GENERATOR_VERSION};
use crate::error::SweepError;
use crate::hybrid::{derive_seed, solve_hybrid};
use crate::tree::{LevelSequence, Tree};

pub const DEFAULT_BLOCK_SIZE: usize = 1024;

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub n_min: usize,
    pub n_max: usize,
    pub workers: usize,
    pub block_size: usize,
    pub results: PathBuf,
    pub checkpoint: PathBuf,
    /// Per-`n` reports are appended here when given.
    pub report: Option<PathBuf>,
    /// Discard any previous checkpoint and results.
    pub fresh: bool,
    /// Stop after this many blocks, as if killed. For resume testing.
    pub stop_after_blocks: Option<u64>,
}

impl SweepOptions {
    pub fn new(n_min: usize, n_max: usize, results: impl Into<PathBuf>, checkpoint: impl Into<PathBuf>) -> Self {
        SweepOptions {
            n_min,
            n_max,
            workers: 1,
            block_size: DEFAULT_BLOCK_SIZE,
            results: results.into(),
            checkpoint: checkpoint.into(),
            report: None,
            fresh: false,
            stop_after_blocks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub n: usize,
    /// Trees processed by this invocation.
    pub trees_total: u64,
    pub trees_solved: u64,
    pub per_solver: BTreeMap<String, u64>,
    /// Level sequences that failed every solver.
    pub failures: Vec<String>,
    /// Seconds.
    pub wall_time: f64,
    /// Summed solver time over all workers, seconds.
    pub cpu_time: f64,
    /// Trees skipped because an earlier run had completed them.
    pub skipped: u64,
}

impl SweepReport {
    fn new(n: usize, skipped: u64) -> Self {
        let per_solver = SolverKind::PIPELINE
            .iter()
            .chain([&SolverKind::Exhaustive])
            .map(|k| (k.to_string(), 0))
            .collect();
        SweepReport {
            n,
            trees_total: 0,
            trees_solved: 0,
            per_solver,
            failures: Vec::new(),
            wall_time: 0.0,
            cpu_time: 0.0,
            skipped,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub reports: Vec<SweepReport>,
    /// True if `stop_after_blocks` cut the run short.
    pub interrupted: bool,
}

impl SweepOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &str> {
        self.reports.iter().flat_map(|r| r.failures.iter().map(String::as_str))
    }
}

/// One checkpoint line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointEntry {
    pub n: usize,
    pub completed: u64,
    pub seed: u64,
}

pub fn format_checkpoint(entries: &[CheckpointEntry]) -> String {
    entries
        .iter()
        .map(|e| {
            format!(
                "n={} completed={} seed={} gen={}\n",
                e.n, e.completed, e.seed, GENERATOR_VERSION
            )
        })
        .collect()
}

/// Parses checkpoint text; the generator tag must match this build.
pub fn parse_checkpoint(path: &Path, text: &str) -> Result<Vec<CheckpointEntry>, SweepError> {
    let corrupt = |line: usize, reason: String| SweepError::CorruptCheckpoint {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut entries: Vec<CheckpointEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut fields = BTreeMap::new();
        for token in raw.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| corrupt(line_no, format!("token `{token}` is not key=value")))?;
            if fields.insert(k, v).is_some() {
                return Err(corrupt(line_no, format!("repeated key `{k}`")));
            }
        }
        let mut take = |key: &str| {
            fields
                .remove(key)
                .ok_or_else(|| corrupt(line_no, format!("missing `{key}`")))
        };
        let n_text = take("n")?;
        let completed_text = take("completed")?;
        let seed_text = take("seed")?;
        let gen = take("gen")?;
        if let Some(extra) = fields.keys().next() {
            return Err(corrupt(line_no, format!("unknown key `{extra}`")));
        }
        let number = |v: &str, key: &str| {
            v.parse::<u64>()
                .map_err(|_| corrupt(line_no, format!("`{key}` is not a number")))
        };
        let entry = CheckpointEntry {
            n: number(n_text, "n")? as usize,
            completed: number(completed_text, "completed")?,
            seed: number(seed_text, "seed")?,
        };
        if gen != GENERATOR_VERSION {
            return Err(SweepError::CheckpointMismatch {
                path: path.to_path_buf(),
                field: "gen",
                found: gen.to_string(),
                expected: GENERATOR_VERSION.to_string(),
            });
        }
        if entries.last().is_some_and(|prev| prev.n >= entry.n) {
            return Err(corrupt(line_no, "sizes out of order".into()));
        }
        entries.push(entry);
    }
    Ok(entries)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write-temp-then-rename.
fn write_checkpoint(path: &Path, entries: &[CheckpointEntry]) -> Result<(), SweepError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(format_checkpoint(entries).as_bytes())
            .map_err(io_err(&tmp))?;
        file.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Byte length of the results prefix covered by the checkpoint.
///
/// Certificates of one size appear in stream order, so the valid lines for
/// size `n` are exactly those whose trees lie in the first `completed`
/// emissions. Anything after the first line that is not, including a torn
/// final line, is past the checkpoint.
fn covered_prefix(path: &Path, entries: &[CheckpointEntry]) -> Result<u64, SweepError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(io_err(path)(e)),
    };
    let done: BTreeMap<usize, u64> = entries.iter().map(|e| (e.n, e.completed)).collect();
    let mut prefixes: BTreeMap<usize, HashSet<Vec<usize>>> = BTreeMap::new();
    let mut reader = BufReader::new(file);
    let mut offset = 0u64;
    let mut line = String::new();
    let mut last_n = 0usize;
    loop {
        line.clear();
        let read = reader.read_line(&mut line).map_err(io_err(path))?;
        if read == 0 || !line.ends_with('\n') {
            break;
        }
        let Ok(cert) = serde_json::from_str::<Certificate>(&line) else {
            break;
        };
        let Some(&completed) = done.get(&cert.n) else { break };
        if cert.n < last_n {
            break;
        }
        last_n = cert.n;
        let known = prefixes.entry(cert.n).or_insert_with(|| {
            free_trees(cert.n)
                .take(completed as usize)
                .map(LevelSequence::into_vec)
                .collect()
        });
        if !known.contains(&cert.levels) {
            break;
        }
        offset += read as u64;
    }
    Ok(offset)
}

/// Prepares the checkpoint and results files. Returns the entries to
/// resume from.
fn prepare(cfg: &SolverConfig, opts: &SweepOptions) -> Result<Vec<CheckpointEntry>, SweepError> {
    let existing = if opts.fresh {
        None
    } else {
        match fs::read_to_string(&opts.checkpoint) {
            Ok(text) => Some(parse_checkpoint(&opts.checkpoint, &text)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(io_err(&opts.checkpoint)(e)),
        }
    };
    let Some(entries) = existing else {
        File::create(&opts.results).map_err(io_err(&opts.results))?;
        write_checkpoint(&opts.checkpoint, &[])?;
        return Ok(Vec::new());
    };
    for e in &entries {
        if e.seed != cfg.global_seed {
            return Err(SweepError::CheckpointMismatch {
                path: opts.checkpoint.clone(),
                field: "seed",
                found: e.seed.to_string(),
                expected: cfg.global_seed.to_string(),
            });
        }
        if !(opts.n_min..=opts.n_max).contains(&e.n) {
            return Err(SweepError::CheckpointMismatch {
                path: opts.checkpoint.clone(),
                field: "n",
                found: e.n.to_string(),
                expected: format!("{}..={}", opts.n_min, opts.n_max),
            });
        }
    }
    let keep = covered_prefix(&opts.results, &entries)?;
    let file = OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(false)
        .open(&opts.results)
        .map_err(io_err(&opts.results))?;
    file.set_len(keep).map_err(io_err(&opts.results))?;
    Ok(entries)
}

struct Block {
    id: u64,
    first_index: u64,
    trees: Vec<LevelSequence>,
}

struct Solved {
    levels: LevelSequence,
    certificate: Option<Certificate>,
    elapsed: Duration,
}

fn solve_block(n: usize, cfg: &SolverConfig, block: &Block) -> Vec<Solved> {
    block
        .trees
        .iter()
        .enumerate()
        .map(|(offset, levels)| {
            let seed = derive_seed(cfg.global_seed, n, block.first_index + offset as u64);
            let start = Instant::now();
            let tree = Tree::from_level_sequence(levels);
            let outcome = solve_hybrid(&tree, cfg, seed);
            let certificate = outcome
                .labelling
                .as_ref()
                .zip(outcome.solver)
                .map(|(f, solver)| Certificate::new(levels, f, solver, seed));
            Solved {
                levels: levels.clone(),
                certificate,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

/// Sweeps all sizes `n_min..=n_max`.
pub fn sweep(cfg: &SolverConfig, opts: &SweepOptions) -> Result<SweepOutcome, SweepError> {
    if opts.n_min < 1 || opts.n_min > opts.n_max || opts.n_max > crate::backtrack::MAX_SOLVER_NODES {
        return Err(SweepError::BadRange {
            min: opts.n_min,
            max: opts.n_max,
        });
    }
    if opts.workers == 0 {
        return Err(SweepError::NoWorkers);
    }
    let block_size = opts.block_size.max(1);
    let mut entries = prepare(cfg, opts)?;
    let results = OpenOptions::new()
        .append(true)
        .open(&opts.results)
        .map_err(io_err(&opts.results))?;
    let mut results = BufWriter::new(results);

    let mut outcome = SweepOutcome {
        reports: Vec::new(),
        interrupted: false,
    };
    let mut blocks_done = 0u64;
    for n in opts.n_min..=opts.n_max {
        let resume_at = entries.iter().find(|e| e.n == n).map_or(0, |e| e.completed);
        let total = crate::enumerate::oracle_count_otter(n) as u64;
        if resume_at >= total {
            continue;
        }
        if !entries.iter().any(|e| e.n == n) {
            entries.push(CheckpointEntry {
                n,
                completed: 0,
                seed: cfg.global_seed,
            });
        }
        let started = Instant::now();
        let mut report = SweepReport::new(n, resume_at);
        let stop = AtomicBool::new(false);
        let first_block = resume_at / block_size as u64;

        let run = std::thread::scope(|scope| -> Result<(), SweepError> {
            let (work_tx, work_rx) = bounded::<Block>(opts.workers * 2);
            let (done_tx, done_rx) = bounded::<(u64, Vec<Solved>)>(opts.workers * 2);
            let stop = &stop;
            scope.spawn(move || {
                let mut stream = skip(free_trees(n), resume_at);
                let mut id = first_block;
                loop {
                    let first_index = stream.index();
                    let trees: Vec<_> = stream.by_ref().take(block_size).collect();
                    if trees.is_empty() || stop.load(Ordering::Relaxed) {
                        break;
                    }
                    if work_tx.send(Block { id, first_index, trees }).is_err() {
                        break;
                    }
                    id += 1;
                }
            });
            for _ in 0..opts.workers {
                let work_rx = work_rx.clone();
                let done_tx = done_tx.clone();
                scope.spawn(move || {
                    for block in work_rx {
                        if stop.load(Ordering::Relaxed) {
                            break;
                        }
                        let solved = solve_block(n, cfg, &block);
                        if done_tx.send((block.id, solved)).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(work_rx);
            drop(done_tx);

            let mut pending: BTreeMap<u64, Vec<Solved>> = BTreeMap::new();
            let mut next = first_block;
            let mut completed = resume_at;
            let result = (|| {
                for (id, solved) in &done_rx {
                    pending.insert(id, solved);
                    while let Some(block) = pending.remove(&next) {
                        for s in &block {
                            report.trees_total += 1;
                            report.cpu_time += s.elapsed.as_secs_f64();
                            match &s.certificate {
                                Some(c) => {
                                    report.trees_solved += 1;
                                    *report.per_solver.entry(c.solver.to_string()).or_default() += 1;
                                    crate::certificate::write_certificate(&mut results, c)?;
                                }
                                None => report.failures.push(s.levels.to_string()),
                            }
                        }
                        completed += block.len() as u64;
                        results.flush()?;
                        results.get_ref().sync_data()?;
                        if let Some(e) = entries.iter_mut().find(|e| e.n == n) {
                            e.completed = completed;
                        }
                        write_checkpoint(&opts.checkpoint, &entries)?;
                        next += 1;
                        blocks_done += 1;
                        if opts.stop_after_blocks.is_some_and(|limit| blocks_done >= limit) {
                            outcome.interrupted = true;
                            return Ok(());
                        }
                    }
                }
                Ok(())
            })();
            stop.store(true, Ordering::Relaxed);
            drop(done_rx);
            result
        });
        run?;
        report.wall_time = started.elapsed().as_secs_f64();
        if let Some(path) = &opts.report {
            append_report(path, &report)?;
        }
        outcome.reports.push(report);
        if outcome.interrupted {
            break;
        }
    }
    Ok(outcome)
}

fn append_report(path: &Path, report: &SweepReport) -> Result<(), SweepError> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let line = serde_json::to_string(report).expect("report serializes");
    writeln!(file, "{line}").map_err(io_err(path))
}

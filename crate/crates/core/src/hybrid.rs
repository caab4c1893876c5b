//! The filter pipeline: each solver only sees trees the previous ones missed.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::backtrack::solve_backtracking;
use crate::config::{SolverConfig, SolverKind};
use crate::labelling::{normalize, Labelling};
use crate::outcome::{AttemptStats, SolveOutcome};
use crate::tabu::solve_tabu;
use crate::tree::Tree;
use crate::twostage::solve_twostage;

/// Runs one solver with the given generator.
pub fn run_solver(kind: SolverKind, tree: &Tree, cfg: &SolverConfig, rng: &mut ChaCha8Rng) -> SolveOutcome {
    match kind {
        SolverKind::TwoStage => solve_twostage(tree, cfg, rng),
        SolverKind::Backtrack => solve_backtracking(tree, cfg, rng),
        SolverKind::Tabu => solve_tabu(tree, cfg, rng),
        SolverKind::Exhaustive => solve_exhaustive(tree),
    }
}

fn solve_exhaustive(tree: &Tree) -> SolveOutcome {
    let start = Instant::now();
    let mut stats = AttemptStats::new(SolverKind::Exhaustive);
    let witness = if tree.len() <= 1 {
        Some(Labelling::surjective(vec![0; tree.len()]))
    } else {
        crate::exhaustive::exhaustive_search(tree).ok().and_then(|r| {
            stats.iterations = r.count;
            r.witness
        })
    };
    stats.solved = witness.is_some();
    stats.elapsed_us = start.elapsed().as_micros() as u64;
    SolveOutcome::single(stats, witness)
}

/// Runs the solvers in `cfg.order` from one generator seeded with `seed`
/// and stops at the first success. The labelling is normalized.
pub fn solve_hybrid(tree: &Tree, cfg: &SolverConfig, seed: u64) -> SolveOutcome {
    if tree.len() <= 1 {
        return solve_exhaustive(tree);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = Vec::with_capacity(cfg.order.len());
    for kind in cfg.order {
        let mut outcome = run_solver(kind, tree, cfg, &mut rng);
        attempts.append(&mut outcome.attempts);
        if let Some(f) = outcome.labelling {
            let f = normalize(tree, &f).expect("solver output is verified");
            return SolveOutcome {
                labelling: Some(f),
                solver: Some(kind),
                attempts,
            };
        }
    }
    SolveOutcome {
        labelling: None,
        solver: None,
        attempts,
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-tree seed: SplitMix64 chained over `(global_seed, n, tree_index)`.
///
/// Each step is a bijection of its input, so for fixed `global_seed` and `n`
/// distinct indices always give distinct seeds.
pub fn derive_seed(global_seed: u64, n: usize, tree_index: u64) -> u64 {
    let h = splitmix64(global_seed);
    let h = splitmix64(h ^ n as u64);
    splitmix64(h ^ tree_index)
}

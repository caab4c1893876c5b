//! Tabu search over surjective labellings.
//!
//! The objective is `Eval(f) = (n-1) - |{distinct edge sums}|`. Moves swap
//! the labels of two nodes, which keeps the label multiset (and therefore
//! surjectivity) intact. Each iteration samples a few non-tabu pairs and
//! applies the best strictly improving swap, if any; the swapped pair then
//! stays forbidden for `tenure` iterations.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::backtrack::MAX_SOLVER_NODES;
use crate::config::{SolverConfig, SolverKind};
use crate::labelling::Labelling;
use crate::outcome::{AttemptStats, SolveOutcome};
use crate::tree::Tree;
use crate::verify;

/// Draws per sampled slot before giving up on finding a non-tabu pair.
const SAMPLE_ATTEMPTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceptedSwap {
    pub u: usize,
    pub v: usize,
    pub delta: isize,
    pub eval_before: usize,
    pub eval_after: usize,
}

#[derive(Debug, Clone)]
pub struct TabuState<'t> {
    tree: &'t Tree,
    f: Vec<usize>,
    modulus: usize,
    /// Number of edges carrying each sum value.
    sum_multiplicity: Vec<u32>,
    distinct_sums: usize,
    /// Expiry iteration per ordered node pair (stored symmetrically).
    tabu: Vec<u64>,
    iter: u64,
}

impl<'t> TabuState<'t> {
    /// `labels` must be surjective onto `0..n-1`.
    pub fn new(tree: &'t Tree, labels: Vec<usize>) -> Self {
        let n = tree.len();
        assert!(n >= 2, "tabu search needs at least one edge");
        assert!(n <= MAX_SOLVER_NODES, "tree too large");
        assert_eq!(labels.len(), n);
        let modulus = n - 1;
        let mut sum_multiplicity = vec![0u32; modulus];
        for (a, b) in tree.edges() {
            sum_multiplicity[(labels[a] + labels[b]) % modulus] += 1;
        }
        let distinct_sums = sum_multiplicity.iter().filter(|&&c| c > 0).count();
        TabuState {
            tree,
            f: labels,
            modulus,
            sum_multiplicity,
            distinct_sums,
            tabu: vec![0; n * n],
            iter: 0,
        }
    }

    /// Random permutation of `0..n-1` plus one random duplicate value,
    /// spread over the nodes at random.
    pub fn random<R: Rng>(tree: &'t Tree, rng: &mut R) -> Self {
        let modulus = tree.len() - 1;
        let mut labels: Vec<usize> = (0..modulus).collect();
        labels.push(rng.gen_range(0..modulus));
        labels.shuffle(rng);
        TabuState::new(tree, labels)
    }

    pub fn eval(&self) -> usize {
        self.modulus - self.distinct_sums
    }

    pub fn labels(&self) -> &[usize] {
        &self.f
    }

    pub fn iteration(&self) -> u64 {
        self.iter
    }

    pub fn is_tabu(&self, u: usize, v: usize) -> bool {
        self.tabu[u * self.f.len() + v] > self.iter
    }

    fn sum(&self, a: usize, b: usize) -> usize {
        (self.f[a] + self.f[b]) % self.modulus
    }

    /// Net change per edge-sum value if the labels of `u` and `v` were swapped.
    fn sum_changes(&self, u: usize, v: usize) -> Vec<(usize, i32)> {
        let mut changes: Vec<(usize, i32)> = Vec::new();
        let mut bump = |value: usize, d: i32| match changes.iter_mut().find(|(s, _)| *s == value) {
            Some((_, acc)) => *acc += d,
            None => changes.push((value, d)),
        };
        let (fu, fv) = (self.f[u], self.f[v]);
        for (node, new_label, other) in [(u, fv, v), (v, fu, u)] {
            for &w in self.tree.neighbors(node) {
                if w == other {
                    // f(u) + f(v) is symmetric
                    continue;
                }
                bump(self.sum(node, w), -1);
                bump((new_label + self.f[w]) % self.modulus, 1);
            }
        }
        changes
    }

    /// `Eval` after swapping `u` and `v` minus `Eval` now, touching only the
    /// edges at `u` and `v`.
    pub fn delta_eval(&self, u: usize, v: usize) -> isize {
        assert_ne!(u, v);
        if self.f[u] == self.f[v] {
            return 0;
        }
        let mut gained = 0isize;
        for (value, d) in self.sum_changes(u, v) {
            let before = self.sum_multiplicity[value] as i32;
            let after = before + d;
            debug_assert!(after >= 0);
            if before == 0 && after > 0 {
                gained += 1;
            } else if before > 0 && after == 0 {
                gained -= 1;
            }
        }
        -gained
    }

    pub fn apply_swap(&mut self, u: usize, v: usize) {
        for (value, d) in self.sum_changes(u, v) {
            let m = &mut self.sum_multiplicity[value];
            *m = (*m as i32 + d) as u32;
        }
        self.f.swap(u, v);
        self.distinct_sums = self.sum_multiplicity.iter().filter(|&&c| c > 0).count();
        debug_assert_eq!(
            self.eval(),
            crate::labelling::eval(self.tree, &Labelling::surjective(self.f.clone()))
        );
    }

    fn forbid(&mut self, u: usize, v: usize, tenure: u64) {
        let n = self.f.len();
        let expiry = self.iter + 1 + tenure;
        self.tabu[u * n + v] = expiry;
        self.tabu[v * n + u] = expiry;
    }

    /// One iteration: sample pairs, apply the best improving one.
    pub fn step<R: Rng>(&mut self, rng: &mut R, sample_pairs: usize, tenure: u64) -> Option<AcceptedSwap> {
        let n = self.f.len();
        let mut best: Option<(usize, usize, isize)> = None;
        for _ in 0..sample_pairs {
            let pair = (0..SAMPLE_ATTEMPTS).find_map(|_| {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n - 1);
                let v = if v >= u { v + 1 } else { v };
                (!self.is_tabu(u, v)).then_some((u, v))
            });
            let Some((u, v)) = pair else { continue };
            let delta = self.delta_eval(u, v);
            if delta < 0 && best.is_none_or(|(_, _, d)| delta < d) {
                best = Some((u, v, delta));
            }
        }
        let accepted = best.map(|(u, v, delta)| {
            let eval_before = self.eval();
            self.apply_swap(u, v);
            self.forbid(u, v, tenure);
            AcceptedSwap {
                u,
                v,
                delta,
                eval_before,
                eval_after: self.eval(),
            }
        });
        self.iter += 1;
        accepted
    }
}

pub fn solve_tabu<R: Rng>(tree: &Tree, cfg: &SolverConfig, rng: &mut R) -> SolveOutcome {
    let start = Instant::now();
    let mut stats = AttemptStats::new(SolverKind::Tabu);
    let n = tree.len();
    if n <= 1 {
        stats.solved = true;
        return SolveOutcome::single(stats, Some(Labelling::surjective(vec![0; n])));
    }
    let mut state = TabuState::random(tree, rng);
    let mut best = state.eval();
    let mut found = None;
    for _ in 0..cfg.tabu_max_iters(n) {
        if state.step(rng, cfg.sample_pairs, cfg.tenure).is_some() {
            stats.swaps += 1;
            best = best.min(state.eval());
        }
        stats.iterations += 1;
        if state.eval() == 0 {
            let f = Labelling::surjective(state.labels().to_vec());
            assert!(verify::is_harmonious(tree, &f), "tabu produced a bad labelling");
            found = Some(f);
            break;
        }
    }
    stats.best_eval = Some(best);
    stats.solved = found.is_some();
    stats.elapsed_us = start.elapsed().as_micros() as u64;
    SolveOutcome::single(stats, found)
}

//! Probabilistic backtracking.
//!
//! Nodes are labelled in preorder, so each new label fixes exactly the edge
//! to the node's parent. A label is valid when it keeps the partial
//! labelling injective (the root excepted) and the fixed edge sums pairwise
//! distinct. Candidates are shuffled once per visit of a depth and tried in
//! that order; running out of candidates backtracks one node. A run stops
//! after `backtrack_limit` backtracks and a new run starts from a fresh
//! random root label.
//!
//! The same engine labels the internal nodes in the first stage of the
//! two-stage solver, with the bijective value range `0..n` instead.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::{SolverConfig, SolverKind};
use crate::labelling::Labelling;
use crate::outcome::{AttemptStats, SolveOutcome};
use crate::tree::Tree;
use crate::verify;

/// Bitsets are `u64`, so solver inputs are capped here.
pub const MAX_SOLVER_NODES: usize = 64;

/// How labels may repeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelRange {
    /// Values `0..n-1`; the root's value is not reserved, so it can be
    /// reused by exactly one other node.
    RootDuplicate,
    /// Values `0..n`, all distinct.
    Injective,
}

const UNSET: usize = usize::MAX;

/// Partial labelling along a fixed node order.
#[derive(Debug, Clone)]
pub struct BacktrackState<'t> {
    tree: &'t Tree,
    order: Vec<usize>,
    range: LabelRange,
    modulus: usize,
    labels: Vec<usize>,
    depth: usize,
    used_node_labels: u64,
    used_edge_labels: u64,
    choice_stack: Vec<Vec<usize>>,
    backtrack_count: u64,
    forward_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Solved,
    LimitReached,
    /// Every candidate under this root label was tried.
    Exhausted,
}

impl<'t> BacktrackState<'t> {
    /// Full-tree state in root-duplicate mode with the root labelled.
    pub fn new(tree: &'t Tree, root_label: usize) -> Self {
        let order = (0..tree.len()).collect();
        let mut state = BacktrackState::with_order(tree, order, LabelRange::RootDuplicate);
        state.assign(root_label);
        state
    }

    /// `order` must start with the root and list every node after its parent.
    pub fn with_order(tree: &'t Tree, order: Vec<usize>, range: LabelRange) -> Self {
        assert!(tree.len() <= MAX_SOLVER_NODES, "tree too large for solver bitsets");
        debug_assert!(order
            .iter()
            .enumerate()
            .all(|(i, &v)| { i == 0 || tree.parent(v).is_some_and(|p| order[..i].contains(&p)) }));
        BacktrackState {
            tree,
            order,
            range,
            modulus: tree.len().saturating_sub(1).max(1),
            labels: vec![UNSET; tree.len()],
            depth: 0,
            used_node_labels: 0,
            used_edge_labels: 0,
            choice_stack: Vec::new(),
            backtrack_count: 0,
            forward_steps: 0,
        }
    }

    fn value_count(&self) -> usize {
        match self.range {
            LabelRange::RootDuplicate => self.modulus,
            LabelRange::Injective => self.tree.len(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn backtrack_count(&self) -> u64 {
        self.backtrack_count
    }

    /// Node labels, `None` where unassigned.
    pub fn label(&self, node: usize) -> Option<usize> {
        (self.labels[node] != UNSET).then_some(self.labels[node])
    }

    pub fn used_node_labels(&self) -> u32 {
        self.used_node_labels.count_ones()
    }

    pub fn used_edge_labels(&self) -> u32 {
        self.used_edge_labels.count_ones()
    }

    /// Labels that keep node labels injective and edge sums distinct.
    pub fn valid_labels(&self, node: usize) -> Vec<usize> {
        debug_assert_eq!(Some(&node), self.order.get(self.depth));
        let parent_label = self.tree.parent(node).map(|p| self.labels[p]);
        (0..self.value_count())
            .filter(|&v| {
                self.used_node_labels & (1 << v) == 0
                    && parent_label.is_none_or(|pl| self.used_edge_labels & (1 << ((v + pl) % self.modulus)) == 0)
            })
            .collect()
    }

    /// Labels the node at the current depth. The label must be valid.
    pub fn assign(&mut self, label: usize) {
        let node = self.order[self.depth];
        self.labels[node] = label;
        let is_root = self.depth == 0;
        if !is_root || self.range == LabelRange::Injective {
            self.used_node_labels |= 1 << label;
        }
        if let Some(p) = self.tree.parent(node).filter(|_| !is_root) {
            self.used_edge_labels |= 1 << ((label + self.labels[p]) % self.modulus);
        }
        self.depth += 1;
    }

    /// Removes the most recent label and returns it.
    pub fn unassign(&mut self) -> usize {
        self.depth -= 1;
        let node = self.order[self.depth];
        let label = std::mem::replace(&mut self.labels[node], UNSET);
        let is_root = self.depth == 0;
        if !is_root || self.range == LabelRange::Injective {
            self.used_node_labels &= !(1 << label);
        }
        if let Some(p) = self.tree.parent(node).filter(|_| !is_root) {
            self.used_edge_labels &= !(1 << ((label + self.labels[p]) % self.modulus));
        }
        label
    }

    fn push_choices<R: Rng>(&mut self, rng: &mut R) {
        let mut candidates = self.valid_labels(self.order[self.depth]);
        candidates.shuffle(rng);
        self.choice_stack.push(candidates);
    }

    fn perturb<R: Rng>(&mut self, rng: &mut R) {
        let slot = rng.gen_range(0..self.choice_stack.len());
        let pending = &mut self.choice_stack[slot];
        if pending.len() >= 2 {
            let a = rng.gen_range(0..pending.len());
            let b = rng.gen_range(0..pending.len());
            pending.swap(a, b);
        }
    }

    /// Extends the current labelling along the order, the root already set.
    pub fn search<R: Rng>(&mut self, rng: &mut R, limit: u64, perturbation: f64) -> RunStatus {
        assert!(self.depth >= 1, "root must be labelled before searching");
        let target = self.order.len();
        if self.depth == target {
            return RunStatus::Solved;
        }
        self.push_choices(rng);
        loop {
            let next = self.choice_stack.last_mut().and_then(Vec::pop);
            match next {
                Some(label) => {
                    self.assign(label);
                    self.forward_steps += 1;
                    if self.depth == target {
                        return RunStatus::Solved;
                    }
                    self.push_choices(rng);
                    if perturbation > 0.0 && rng.gen_bool(perturbation) {
                        self.perturb(rng);
                    }
                }
                None => {
                    self.choice_stack.pop();
                    if self.depth == 1 {
                        return RunStatus::Exhausted;
                    }
                    if self.backtrack_count >= limit {
                        return RunStatus::LimitReached;
                    }
                    self.backtrack_count += 1;
                    self.unassign();
                }
            }
        }
    }

    /// Labels in node order; unassigned nodes are absent from the result.
    pub fn into_labels(self) -> Vec<Option<usize>> {
        self.labels.into_iter().map(|l| (l != UNSET).then_some(l)).collect()
    }
}

pub fn solve_backtracking<R: Rng>(tree: &Tree, cfg: &SolverConfig, rng: &mut R) -> SolveOutcome {
    let start = Instant::now();
    let mut stats = AttemptStats::new(SolverKind::Backtrack);
    let n = tree.len();
    let mut found = None;
    if n <= 1 {
        found = Some(Labelling::surjective(vec![0; n]));
    } else {
        let modulus = n - 1;
        for _ in 0..cfg.restarts {
            stats.runs += 1;
            let mut state = BacktrackState::new(tree, rng.gen_range(0..modulus));
            let status = state.search(rng, cfg.backtrack_limit, cfg.perturbation);
            stats.backtracks += state.backtrack_count;
            stats.iterations += state.forward_steps;
            match status {
                RunStatus::Solved => {
                    let labels = state.into_labels().into_iter().map(|l| l.expect("complete")).collect();
                    let f = Labelling::surjective(labels);
                    assert!(verify::is_harmonious(tree, &f), "backtracking produced a bad labelling");
                    found = Some(f);
                    break;
                }
                RunStatus::Exhausted => {
                    // shifting preserves root duplication, so other roots fail too
                    stats.exhausted = true;
                    break;
                }
                RunStatus::LimitReached => {}
            }
        }
    }
    stats.solved = found.is_some();
    stats.elapsed_us = start.elapsed().as_micros() as u64;
    SolveOutcome::single(stats, found)
}

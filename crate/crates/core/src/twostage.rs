//! Two-stage constraint solving.
//!
//! Stage 1 labels the internal nodes with distinct values from `0..n` so
//! that internal–internal edge sums (mod `n-1`) are distinct. Given that
//! partial labelling, every leaf only interacts with its parent's fixed
//! label, so stage 2 is a small CSP over the leaves:
//!
//! * leaf values are distinct and avoid the values used in stage 1,
//! * each leaf-edge sum avoids the internal sums `G`,
//! * leaf-edge sums are distinct among themselves.
//!
//! Stage 2 runs a depth-first search with forward checking (a fixed leaf
//! removes its value and every value that would repeat its edge sum from
//! the other domains) and smallest-domain-first variable order. A failed
//! stage 2 sends the solver back to a fresh stage-1 sample.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::backtrack::{BacktrackState, LabelRange, RunStatus, MAX_SOLVER_NODES};
use crate::config::{SolverConfig, SolverKind};
use crate::labelling::{normalize, Labelling};
use crate::outcome::{AttemptStats, SolveOutcome};
use crate::tree::Tree;

/// Labels per node; `None` for nodes not yet labelled.
pub type PartialLabels = Vec<Option<usize>>;

/// Randomized backtracking over the internal nodes in preorder.
///
/// Returns `None` if the backtrack budget runs out. Trees with `n ≤ 2` have
/// no internal nodes and get an empty assignment.
pub fn stage1_internal<R: Rng>(tree: &Tree, cfg: &SolverConfig, rng: &mut R) -> Option<PartialLabels> {
    stage1_with_stats(tree, cfg, rng).0
}

fn stage1_with_stats<R: Rng>(tree: &Tree, cfg: &SolverConfig, rng: &mut R) -> (Option<PartialLabels>, u64) {
    let n = tree.len();
    let internal = tree.internal_nodes();
    if internal.is_empty() {
        return (Some(vec![None; n]), 0);
    }
    let mut state = BacktrackState::with_order(tree, internal, LabelRange::Injective);
    state.assign(rng.gen_range(0..n));
    let status = state.search(rng, cfg.stage1_budget, cfg.perturbation);
    let backtracks = state.backtrack_count();
    match status {
        RunStatus::Solved => (Some(state.into_labels()), backtracks),
        RunStatus::LimitReached | RunStatus::Exhausted => (None, backtracks),
    }
}

/// Reduced problem over the leaves for a fixed internal labelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafCsp {
    n: usize,
    modulus: usize,
    partial: PartialLabels,
    pub leaves: Vec<usize>,
    /// Label of each leaf's parent, aligned with `leaves`.
    pub parent_label: Vec<usize>,
    /// Values taken by internal nodes.
    pub used_values: u64,
    /// Sums of internal–internal edges.
    pub used_sums: u64,
    /// Initial candidate values per leaf, as bitsets over `0..n`.
    pub domains: Vec<u64>,
}

/// Stage 2 cannot start: this leaf has no admissible value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyDomain {
    pub leaf: usize,
}

/// Builds the leaf CSP for `n ≥ 3` from a stage-1 labelling of the
/// internal nodes.
pub fn build_leaf_csp(tree: &Tree, partial: &[Option<usize>]) -> Result<LeafCsp, EmptyDomain> {
    let n = tree.len();
    assert!(n >= 3, "leaf CSP needs an internal node");
    assert!(n <= MAX_SOLVER_NODES);
    let modulus = n - 1;
    let mut used_values = 0u64;
    let mut used_sums = 0u64;
    for v in 0..n {
        if let Some(label) = partial[v] {
            used_values |= 1 << label;
            if let Some(pl) = tree.parent(v).and_then(|p| partial[p]) {
                used_sums |= 1 << ((label + pl) % modulus);
            }
        }
    }
    let leaves = tree.leaves();
    let parent_label: Vec<usize> = leaves
        .iter()
        .map(|&leaf| {
            let p = tree.neighbors(leaf)[0];
            partial[p].expect("leaf parent is internal and labelled")
        })
        .collect();
    let mut domains = Vec::with_capacity(leaves.len());
    for (i, &leaf) in leaves.iter().enumerate() {
        let domain = (0..n)
            .filter(|&w| used_values & (1 << w) == 0 && used_sums & (1 << ((w + parent_label[i]) % modulus)) == 0)
            .fold(0u64, |acc, w| acc | 1 << w);
        if domain == 0 {
            return Err(EmptyDomain { leaf });
        }
        domains.push(domain);
    }
    Ok(LeafCsp {
        n,
        modulus,
        partial: partial.to_vec(),
        leaves,
        parent_label,
        used_values,
        used_sums,
        domains,
    })
}

/// Outcome of a leaf search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafSearch {
    /// One value per leaf, aligned with [`LeafCsp::leaves`].
    pub values: Option<Vec<usize>>,
    pub nodes: u64,
    pub backtracks: u64,
    pub budget_exhausted: bool,
}

struct Search<'a, R, F> {
    csp: &'a LeafCsp,
    rng: &'a mut R,
    observer: F,
    budget: u64,
    nodes: u64,
    backtracks: u64,
}

struct OutOfBudget;

impl<R: Rng, F: FnMut(&[Option<usize>], &[u64])> Search<'_, R, F> {
    /// Values of `leaf` whose edge sum equals `sum`.
    fn values_with_sum(&self, leaf: usize, sum: usize) -> u64 {
        let m = self.csp.modulus;
        let base = (sum + m - self.csp.parent_label[leaf] % m) % m;
        let mut mask = 1u64 << base;
        if base + m < self.csp.n {
            mask |= 1 << (base + m);
        }
        mask
    }

    fn dfs(&mut self, assigned: &mut Vec<Option<usize>>, domains: &[u64]) -> Result<bool, OutOfBudget> {
        self.nodes += 1;
        (self.observer)(assigned, domains);
        let next = (0..assigned.len())
            .filter(|&i| assigned[i].is_none())
            .min_by_key(|&i| domains[i].count_ones());
        let Some(leaf) = next else {
            return Ok(true);
        };
        let mut values: Vec<usize> = (0..self.csp.n).filter(|&w| domains[leaf] & (1 << w) != 0).collect();
        values.shuffle(self.rng);
        for w in values {
            let sum = (w + self.csp.parent_label[leaf]) % self.csp.modulus;
            let mut pruned = domains.to_vec();
            pruned[leaf] = 1 << w;
            let mut wiped_out = false;
            for other in 0..assigned.len() {
                if other == leaf || assigned[other].is_some() {
                    continue;
                }
                pruned[other] &= !(1u64 << w);
                pruned[other] &= !self.values_with_sum(other, sum);
                wiped_out |= pruned[other] == 0;
            }
            if !wiped_out {
                assigned[leaf] = Some(w);
                if self.dfs(assigned, &pruned)? {
                    return Ok(true);
                }
                assigned[leaf] = None;
            }
            if self.backtracks >= self.budget {
                return Err(OutOfBudget);
            }
            self.backtracks += 1;
        }
        Ok(false)
    }
}

/// Forward-checking search over the leaf CSP with a backtrack budget.
pub fn solve_leaf_csp<R: Rng>(csp: &LeafCsp, rng: &mut R, budget: u64) -> LeafSearch {
    solve_leaf_csp_observed(csp, rng, budget, |_, _| {})
}

/// Same as [`solve_leaf_csp`]; `observer` sees the committed values and the
/// propagated domains at every search node.
pub fn solve_leaf_csp_observed<R: Rng>(
    csp: &LeafCsp,
    rng: &mut R,
    budget: u64,
    observer: impl FnMut(&[Option<usize>], &[u64]),
) -> LeafSearch {
    let mut search = Search {
        csp,
        rng,
        observer,
        budget,
        nodes: 0,
        backtracks: 0,
    };
    let mut assigned = vec![None; csp.leaves.len()];
    let result = search.dfs(&mut assigned, &csp.domains);
    let (values, budget_exhausted) = match result {
        Ok(true) => (
            Some(assigned.into_iter().map(|v| v.expect("complete")).collect()),
            false,
        ),
        Ok(false) => (None, false),
        Err(OutOfBudget) => (None, true),
    };
    LeafSearch {
        values,
        nodes: search.nodes,
        backtracks: search.backtracks,
        budget_exhausted,
    }
}

impl LeafCsp {
    /// Internal labels plus the given leaf values as a bijective labelling.
    pub fn extend(&self, values: &[usize]) -> Labelling {
        let mut labels = self.partial.clone();
        for (&leaf, &w) in self.leaves.iter().zip(values) {
            labels[leaf] = Some(w);
        }
        Labelling::bijective(labels.into_iter().map(|l| l.expect("every node labelled")).collect())
    }

    pub fn partial(&self) -> &[Option<usize>] {
        &self.partial
    }
}

pub fn solve_twostage<R: Rng>(tree: &Tree, cfg: &SolverConfig, rng: &mut R) -> SolveOutcome {
    let start = Instant::now();
    let mut stats = AttemptStats::new(SolverKind::TwoStage);
    let n = tree.len();
    let mut found = None;
    for _ in 0..cfg.twostage_runs {
        stats.runs += 1;
        if n <= 2 {
            found = Some(Labelling::surjective(vec![0; n]));
            break;
        }
        let (partial, stage1_backtracks) = stage1_with_stats(tree, cfg, rng);
        stats.backtracks += stage1_backtracks;
        let Some(partial) = partial else { continue };
        let Ok(csp) = build_leaf_csp(tree, &partial) else {
            continue;
        };
        let search = solve_leaf_csp(&csp, rng, cfg.stage2_budget);
        stats.iterations += search.nodes;
        stats.backtracks += search.backtracks;
        if let Some(values) = search.values {
            let f = csp.extend(&values);
            let normalized = normalize(tree, &f).expect("two-stage produced a bad labelling");
            found = Some(normalized);
            break;
        }
    }
    stats.solved = found.is_some();
    stats.elapsed_us = start.elapsed().as_micros() as u64;
    SolveOutcome::single(stats, found)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::tree::LevelSequence;
    use crate::verify::is_harmonious;

    fn tree(v: &[usize]) -> Tree {
        Tree::from_level_sequence(&LevelSequence::new(v.to_vec()).unwrap())
    }

    fn bits(mask: u64) -> Vec<usize> {
        (0..64).filter(|&b| mask & (1 << b) != 0).collect()
    }

    #[test]
    fn star_leaf_csp() {
        let star = tree(&[0, 1, 1, 1]);
        let csp = build_leaf_csp(&star, &[Some(3), None, None, None]).unwrap();
        assert_eq!(csp.used_sums, 0);
        for &d in &csp.domains {
            assert_eq!(bits(d), vec![0, 1, 2]);
        }
        let out = solve_leaf_csp(&csp, &mut ChaCha8Rng::seed_from_u64(0), 100);
        let mut values = out.values.unwrap();
        values.sort_unstable();
        assert_eq!(values, vec![0, 1, 2]);
    }

    #[test]
    fn p4_dead_end_sample() {
        let p4 = tree(&[0, 1, 2, 1]);
        let csp = build_leaf_csp(&p4, &[Some(0), Some(1), None, None]).unwrap();
        assert_eq!(bits(csp.used_sums), vec![1]);
        assert_eq!(csp.leaves, vec![2, 3]);
        assert_eq!(bits(csp.domains[0]), vec![2]);
        assert_eq!(bits(csp.domains[1]), vec![2, 3]);
        let out = solve_leaf_csp(&csp, &mut ChaCha8Rng::seed_from_u64(0), 1000);
        assert_eq!(out.values, None);
        assert!(!out.budget_exhausted);
    }

    #[test]
    fn empty_domain_is_reported() {
        // path on 5 nodes rooted at its center; internal labels 0,1,3 leave
        // values {2,4}, and both give leaf 2 (parent label 1) a sum in G = {1,3}
        let p5 = tree(&[0, 1, 2, 1, 2]);
        assert_eq!(
            build_leaf_csp(&p5, &[Some(0), Some(1), None, Some(3), None]),
            Err(EmptyDomain { leaf: 2 })
        );
    }

    #[test]
    fn stage1_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let star = tree(&[0, 1, 1, 1]);
        let p = stage1_internal(&star, &SolverConfig::default(), &mut rng).unwrap();
        assert!(p[0].is_some() && p[1..].iter().all(Option::is_none));
        let p4 = tree(&[0, 1, 2, 1]);
        let p = stage1_internal(&p4, &SolverConfig::default(), &mut rng).unwrap();
        assert_ne!(p[0], p[1]);
        assert!(p[2].is_none() && p[3].is_none());
        let p2 = tree(&[0, 1]);
        assert_eq!(
            stage1_internal(&p2, &SolverConfig::default(), &mut rng).unwrap(),
            vec![None, None]
        );
    }

    #[test]
    fn solves_small_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seq in [&[0, 1, 1, 1][..], &[0, 1, 2, 1], &[0, 1, 2, 3, 1, 2, 1, 1], &[0, 1]] {
            let t = tree(seq);
            let out = solve_twostage(&t, &SolverConfig::default(), &mut rng);
            let f = out.labelling.expect("solved");
            assert!(is_harmonious(&t, &f));
            assert_eq!(f.duplicated_value(), if t.len() > 1 { Some(0) } else { None });
        }
    }

    #[test]
    fn zero_runs_fail() {
        let cfg = SolverConfig {
            twostage_runs: 0,
            ..SolverConfig::default()
        };
        let out = solve_twostage(&tree(&[0, 1]), &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(!out.is_success());
    }
}

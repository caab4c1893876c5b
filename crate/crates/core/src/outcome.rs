use serde::Serialize;

use crate::config::SolverKind;
use crate::labelling::Labelling;

/// Search statistics of one solver attempt.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AttemptStats {
    pub solver: Option<SolverKind>,
    pub solved: bool,
    /// Forward steps (backtracking), iterations (tabu) or leaf-search nodes.
    pub iterations: u64,
    pub backtracks: u64,
    /// Backtracking runs or two-stage rounds started.
    pub runs: u64,
    pub swaps: u64,
    /// Lowest `Eval` seen (tabu only).
    pub best_eval: Option<usize>,
    /// True if a run proved its whole search space empty.
    pub exhausted: bool,
    pub elapsed_us: u64,
}

impl AttemptStats {
    pub fn new(solver: SolverKind) -> Self {
        AttemptStats {
            solver: Some(solver),
            ..AttemptStats::default()
        }
    }
}

/// Result of a solver or of the hybrid pipeline. Failure is a value.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    /// Harmonious labelling, if any solver found one.
    pub labelling: Option<Labelling>,
    pub solver: Option<SolverKind>,
    pub attempts: Vec<AttemptStats>,
}

impl SolveOutcome {
    pub fn single(stats: AttemptStats, labelling: Option<Labelling>) -> Self {
        SolveOutcome {
            solver: labelling.as_ref().and(stats.solver),
            labelling,
            attempts: vec![stats],
        }
    }

    pub fn is_success(&self) -> bool {
        self.labelling.is_some()
    }
}

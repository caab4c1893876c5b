//! Certificates: one JSON object per line, checkable without the solvers.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::SolverKind;
use crate::labelling::{LabelModel, Labelling};
use crate::tree::{LevelSequence, Tree};
use crate::verify::{check_levels, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: usize,
    pub levels: Vec<usize>,
    /// Normalized surjective labels, duplicated value 0.
    pub labels: Vec<usize>,
    pub solver: SolverKind,
    pub seed: u64,
}

impl Certificate {
    /// `labels` should already be normalized.
    pub fn new(levels: &LevelSequence, labels: &Labelling, solver: SolverKind, seed: u64) -> Self {
        Certificate {
            n: levels.len(),
            levels: levels.as_slice().to_vec(),
            labels: labels.labels().to_vec(),
            solver,
            seed,
        }
    }

    /// Re-checks the record from its raw fields only.
    pub fn verify_cold(&self) -> Result<(), Violation> {
        if self.n != self.levels.len() {
            return Err(Violation::LengthMismatch {
                expected: self.n,
                found: self.levels.len(),
            });
        }
        check_levels(&self.levels, &self.labels, LabelModel::Surjective)?;
        if self.n >= 3 {
            // exactly one value occurs twice
            let mut seen = vec![false; self.n - 1];
            let duplicate = self
                .labels
                .iter()
                .copied()
                .find(|&v| std::mem::replace(&mut seen[v], true));
            match duplicate {
                Some(0) => {}
                Some(d) => return Err(Violation::NotNormalized { duplicate: d }),
                None => unreachable!("onto map from n to n-1 values repeats one"),
            }
        }
        Ok(())
    }

    pub fn tree(&self) -> Option<Tree> {
        LevelSequence::new(self.levels.clone())
            .ok()
            .map(|s| Tree::from_level_sequence(&s))
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }
}

pub fn write_certificate<W: Write>(out: &mut W, cert: &Certificate) -> std::io::Result<()> {
    writeln!(out, "{}", cert.to_line())
}

/// One problem found while reading a certificate file. `line` is 1-based.
#[derive(Debug)]
pub enum ReadIssue {
    Io(std::io::Error),
    Malformed { line: usize, reason: String },
    Invalid { line: usize, violation: Violation },
}

/// Summary of a cold verification pass.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct VerifySummary {
    pub records: u64,
}

/// Reads and re-verifies every record, stopping at the first problem.
/// Blank lines are ignored.
pub fn verify_stream<R: BufRead>(input: R) -> Result<VerifySummary, ReadIssue> {
    let mut summary = VerifySummary::default();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(ReadIssue::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let cert: Certificate = serde_json::from_str(&line).map_err(|e| ReadIssue::Malformed {
            line: i + 1,
            reason: e.to_string(),
        })?;
        cert.verify_cold()
            .map_err(|violation| ReadIssue::Invalid { line: i + 1, violation })?;
        summary.records += 1;
    }
    Ok(summary)
}

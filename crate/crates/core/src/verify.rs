//! Stand-alone harmonious check.
//!
//! Nothing here touches [`Tree`] internals or the search code: edges are
//! re-derived from the raw level sequence and duplicates are found with
//! counting arrays, so a bug in the solvers or in `eval` cannot hide itself.

use std::fmt;

use serde::Serialize;

use crate::labelling::{LabelModel, Labelling};
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Violation {
    BadLevels { detail: String },
    LengthMismatch { expected: usize, found: usize },
    LabelOutOfRange { node: usize, label: usize, bound: usize },
    NotOnto { missing: usize },
    DuplicateNodeLabel { label: usize },
    DuplicateEdgeLabel { label: usize },
    NotNormalized { duplicate: usize },
}

impl Violation {
    /// Short machine-friendly reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::BadLevels { .. } => "bad level sequence",
            Violation::LengthMismatch { .. } => "label count mismatch",
            Violation::LabelOutOfRange { .. } => "label out of range",
            Violation::NotOnto { .. } => "label multiset not onto",
            Violation::DuplicateNodeLabel { .. } => "duplicate node label",
            Violation::DuplicateEdgeLabel { .. } => "duplicate edge label",
            Violation::NotNormalized { .. } => "labels not normalized",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadLevels { detail } => write!(f, "{}: {detail}", self.code()),
            Violation::LengthMismatch { expected, found } => {
                write!(f, "{}: expected {expected}, found {found}", self.code())
            }
            Violation::LabelOutOfRange { node, label, bound } => {
                write!(f, "{}: node {node} has {label}, bound {bound}", self.code())
            }
            Violation::NotOnto { missing } => write!(f, "{} (value {missing} unused)", self.code()),
            Violation::DuplicateNodeLabel { label } => write!(f, "{} {label}", self.code()),
            Violation::DuplicateEdgeLabel { label } => write!(f, "{} {label}", self.code()),
            Violation::NotNormalized { duplicate } => write!(f, "{} (duplicate is {duplicate})", self.code()),
        }
    }
}

/// Checks `labels` against the tree encoded by `levels` under `model`.
///
/// A single node is harmonious by convention (its only label must be 0).
pub fn check_levels(levels: &[usize], labels: &[usize], model: LabelModel) -> Result<(), Violation> {
    if levels.first() != Some(&0) || levels[1..].contains(&0) {
        return Err(Violation::BadLevels {
            detail: "root must be the only depth-0 entry".into(),
        });
    }
    if let Some(i) = (1..levels.len()).find(|&i| levels[i] > levels[i - 1] + 1) {
        return Err(Violation::BadLevels {
            detail: format!("depth jump at index {i}"),
        });
    }
    let n = levels.len();
    if labels.len() != n {
        return Err(Violation::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    if n == 1 {
        return match labels[0] {
            0 => Ok(()),
            label => Err(Violation::LabelOutOfRange {
                node: 0,
                label,
                bound: 1,
            }),
        };
    }
    let modulus = n - 1;

    let bound = match model {
        LabelModel::Surjective => modulus,
        LabelModel::Bijective => n,
    };
    let mut seen = vec![0u32; bound];
    for (node, &label) in labels.iter().enumerate() {
        if label >= bound {
            return Err(Violation::LabelOutOfRange { node, label, bound });
        }
        seen[label] += 1;
    }
    match model {
        LabelModel::Surjective => {
            if let Some(missing) = seen.iter().position(|&c| c == 0) {
                return Err(Violation::NotOnto { missing });
            }
        }
        LabelModel::Bijective => {
            if let Some(label) = seen.iter().position(|&c| c > 1) {
                return Err(Violation::DuplicateNodeLabel { label });
            }
        }
    }

    let mut sums = vec![0u32; modulus];
    for i in 1..n {
        let want = levels[i].checked_sub(1).ok_or_else(|| Violation::BadLevels {
            detail: format!("index {i} at depth 0"),
        })?;
        let parent = (0..i)
            .rev()
            .find(|&j| levels[j] == want)
            .ok_or_else(|| Violation::BadLevels {
                detail: format!("index {i} has no parent at depth {want}"),
            })?;
        let s = (labels[i] + labels[parent]) % modulus;
        sums[s] += 1;
        if sums[s] > 1 {
            return Err(Violation::DuplicateEdgeLabel { label: s });
        }
    }
    Ok(())
}

pub fn verify(tree: &Tree, f: &Labelling) -> Result<(), Violation> {
    check_levels(tree.levels(), f.labels(), f.model())
}

pub fn is_harmonious(tree: &Tree, f: &Labelling) -> bool {
    verify(tree, f).is_ok()
}

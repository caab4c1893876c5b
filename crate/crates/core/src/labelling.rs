//! Labellings, induced edge labels, the `Eval` objective and normalization.
//!
//! Labels live in `Z_{n-1}`. Two label models are used:
//!
//! * [`LabelModel::Surjective`]: every label in `0..n-1`, every value used,
//!   so exactly one value appears twice. The backtracking solver always puts
//!   the duplicate on the root; other solvers may not.
//! * [`LabelModel::Bijective`]: the labels are a permutation of `0..n`.
//!   Reducing mod `n-1` merges `0` and `n-1` and yields a surjective
//!   labelling with the same edge sums.

use serde::{Deserialize, Serialize};

use crate::error::LabellingError;
use crate::tree::Tree;
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelModel {
    Surjective,
    Bijective,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labelling {
    labels: Vec<usize>,
    model: LabelModel,
}

/// Edge sums mod `n-1`, one per edge in [`Tree::edges`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLabelling(pub Vec<usize>);

impl Labelling {
    pub fn new(labels: Vec<usize>, model: LabelModel) -> Self {
        Labelling { labels, model }
    }

    pub fn surjective(labels: Vec<usize>) -> Self {
        Labelling::new(labels, LabelModel::Surjective)
    }

    pub fn bijective(labels: Vec<usize>) -> Self {
        Labelling::new(labels, LabelModel::Bijective)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn model(&self) -> LabelModel {
        self.model
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    /// The value carried by two nodes, for surjective labellings of `n ≥ 2`.
    pub fn duplicated_value(&self) -> Option<usize> {
        if self.model != LabelModel::Surjective || self.labels.len() < 2 {
            return None;
        }
        let mut seen = vec![false; self.labels.len()];
        self.labels
            .iter()
            .copied()
            .find(|&v| v < seen.len() && std::mem::replace(&mut seen[v], true))
    }

    /// True if the root's label is the duplicated one and all other labels
    /// are pairwise distinct.
    pub fn duplicate_on_root(&self) -> bool {
        if self.model != LabelModel::Surjective {
            return false;
        }
        let Some((&root, rest)) = self.labels.split_first() else {
            return false;
        };
        let mut sorted = rest.to_vec();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1]) && rest.contains(&root)
    }
}

fn modulus(n: usize) -> usize {
    n.saturating_sub(1)
}

pub fn induced_edge_labels(tree: &Tree, f: &Labelling) -> Result<EdgeLabelling, LabellingError> {
    if f.len() != tree.len() {
        return Err(LabellingError::LengthMismatch {
            expected: tree.len(),
            found: f.len(),
        });
    }
    let m = modulus(tree.len());
    let labels = f.labels();
    Ok(EdgeLabelling(
        tree.edges()
            .into_iter()
            .map(|(u, v)| (labels[u] + labels[v]) % m)
            .collect(),
    ))
}

/// `n - 1` minus the number of distinct edge sums.
///
/// # Panics
///
/// If the labelling length differs from the tree size.
pub fn eval(tree: &Tree, f: &Labelling) -> usize {
    let EdgeLabelling(mut sums) = induced_edge_labels(tree, f).expect("labelling matches tree size");
    sums.sort_unstable();
    sums.dedup();
    modulus(tree.len()) - sums.len()
}

/// Adds `c` to every label mod `n-1`. Bijective labellings are reduced first.
pub fn shift(f: &Labelling, c: usize) -> Labelling {
    let m = modulus(f.len());
    if m == 0 {
        return Labelling::surjective(vec![0; f.len()]);
    }
    Labelling::surjective(f.labels().iter().map(|&v| (v + c) % m).collect())
}

/// Shifts a harmonious labelling so that its duplicated value is 0.
pub fn normalize(tree: &Tree, f: &Labelling) -> Result<Labelling, LabellingError> {
    verify::verify(tree, f).map_err(LabellingError::NotHarmonious)?;
    let n = f.len();
    if n <= 2 {
        return Ok(Labelling::surjective(vec![0; n]));
    }
    if f.model() == LabelModel::Bijective {
        // reducing merges 0 and n-1 into the duplicate value 0
        return Ok(shift(f, 0));
    }
    let m = n - 1;
    let dup = f.duplicated_value().expect("onto labelling repeats one value");
    Ok(shift(f, (m - dup) % m))
}

/// Trivial certificate labels for `n ≤ 2`, or `None` if a search is needed.
pub fn trivial_labelling(n: usize) -> Option<Labelling> {
    (n <= 2).then(|| Labelling::surjective(vec![0; n]))
}

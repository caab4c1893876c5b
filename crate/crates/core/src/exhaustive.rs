//! Brute-force oracle: every permutation of `0..n` as a bijective labelling.

use crate::error::OracleRangeError;
use crate::labelling::Labelling;
use crate::tree::Tree;

pub const EXHAUSTIVE_MAX: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustiveResult {
    pub exists: bool,
    /// Number of harmonious bijective labellings.
    pub count: u64,
    pub witness: Option<Labelling>,
}

/// Calls `visit` with every harmonious permutation labelling and returns how
/// many there were.
pub fn for_each_harmonious_bijective(tree: &Tree, mut visit: impl FnMut(&[usize])) -> Result<u64, OracleRangeError> {
    let n = tree.len();
    if !(1..=EXHAUSTIVE_MAX).contains(&n) {
        return Err(OracleRangeError {
            n,
            min: 1,
            max: EXHAUSTIVE_MAX,
        });
    }
    let edges = tree.edges();
    let m = n.saturating_sub(1).max(1);
    let harmonious = |perm: &[usize]| {
        let mut used = 0u64;
        edges.iter().all(|&(u, v)| {
            let bit = 1u64 << ((perm[u] + perm[v]) % m);
            let fresh = used & bit == 0;
            used |= bit;
            fresh
        })
    };

    // Heap's algorithm, iterative form
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut count = 0u64;
    if harmonious(&perm) {
        count += 1;
        visit(&perm);
    }
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if harmonious(&perm) {
                count += 1;
                visit(&perm);
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(count)
}

pub fn exhaustive_search(tree: &Tree) -> Result<ExhaustiveResult, OracleRangeError> {
    let mut witness = None;
    let count = for_each_harmonious_bijective(tree, |perm| {
        if witness.is_none() {
            witness = Some(Labelling::bijective(perm.to_vec()));
        }
    })?;
    Ok(ExhaustiveResult {
        exists: count > 0,
        count,
        witness,
    })
}

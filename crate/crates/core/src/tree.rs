//! Rooted free trees, level sequences and canonical forms.
//!
//! A tree is stored in preorder: node 0 is the root and every other node
//! comes after its parent. The level sequence (preorder list of depths) is
//! the interchange format; `0,1,2,1` is the path on four nodes rooted at one
//! of its centers.

use std::fmt;
use std::str::FromStr;

use crate::error::LevelSequenceError;

/// Preorder depth list of a rooted tree, root first at depth 0.
///
/// Construction only checks the structural rules (first entry 0, every later
/// entry between 1 and previous + 1). Canonicity is a separate property, see
/// [`Tree::canonicalize`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelSequence(Vec<usize>);

impl LevelSequence {
    pub fn new(seq: Vec<usize>) -> Result<Self, LevelSequenceError> {
        validate_levels(&seq)?;
        Ok(LevelSequence(seq))
    }

    pub(crate) fn from_vec_unchecked(seq: Vec<usize>) -> Self {
        debug_assert!(validate_levels(&seq).is_ok(), "invalid level sequence {seq:?}");
        LevelSequence(seq)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True if this sequence is the canonical form of the free tree it encodes.
    pub fn is_canonical(&self) -> bool {
        Tree::from_level_sequence(self).canonicalize() == *self
    }
}

pub(crate) fn validate_levels(seq: &[usize]) -> Result<(), LevelSequenceError> {
    let Some(&first) = seq.first() else {
        return Err(LevelSequenceError::Empty);
    };
    if first != 0 {
        return Err(LevelSequenceError::NonZeroRoot { found: first });
    }
    for (index, pair) in seq.windows(2).enumerate() {
        let (previous, depth) = (pair[0], pair[1]);
        let index = index + 1;
        if depth == 0 {
            return Err(LevelSequenceError::SecondRoot { index });
        }
        if depth > previous + 1 {
            return Err(LevelSequenceError::DepthJump { index, depth, previous });
        }
    }
    Ok(())
}

impl fmt::Display for LevelSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for LevelSequence {
    type Err = LevelSequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(LevelSequenceError::Empty);
        }
        let seq = s
            .split(',')
            .enumerate()
            .map(|(index, tok)| {
                let tok = tok.trim();
                tok.parse::<usize>().map_err(|_| LevelSequenceError::BadToken {
                    index,
                    token: tok.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        LevelSequence::new(seq)
    }
}

impl TryFrom<Vec<usize>> for LevelSequence {
    type Error = LevelSequenceError;

    fn try_from(seq: Vec<usize>) -> Result<Self, Self::Error> {
        LevelSequence::new(seq)
    }
}

/// A tree rooted at node 0 with nodes numbered in preorder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parents: Vec<Option<usize>>,
    levels: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl Tree {
    /// Parent of node `i` is the nearest earlier node one level up.
    pub fn from_level_sequence(seq: &LevelSequence) -> Tree {
        let levels = seq.as_slice().to_vec();
        let n = levels.len();
        let mut parents = vec![None; n];
        // stack[d] = most recent node seen at depth d
        let mut stack: Vec<usize> = Vec::with_capacity(n);
        for (i, &d) in levels.iter().enumerate() {
            stack.truncate(d);
            if d > 0 {
                parents[i] = Some(stack[d - 1]);
            }
            stack.push(i);
        }
        Tree::from_parts(parents, levels)
    }

    /// Builds a tree from an undirected edge list on nodes `0..n`.
    ///
    /// The result is rooted at original node 0 and renumbered in preorder
    /// (children visited in increasing original id), so node ids generally
    /// change.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Tree, crate::error::TreeError> {
        use crate::error::TreeError;
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if edges.len() != n - 1 {
            return Err(TreeError::EdgeCount {
                nodes: n,
                edges: edges.len(),
            });
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(TreeError::BadEdge { u, v });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let order = preorder_from(&adj, 0);
        if order.len() != n {
            return Err(TreeError::Disconnected);
        }
        let levels = order.iter().map(|&(_, d, _)| d).collect::<Vec<_>>();
        let mut new_id = vec![0; n];
        for (i, &(v, _, _)) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let parents = order.iter().map(|&(_, _, p)| p.map(|p| new_id[p])).collect();
        Ok(Tree::from_parts(parents, levels))
    }

    fn from_parts(parents: Vec<Option<usize>>, levels: Vec<usize>) -> Tree {
        let n = parents.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                adjacency[p].push(i);
                adjacency[i].push(p);
            }
        }
        Tree {
            parents,
            levels,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parents[node]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn level_sequence(&self) -> LevelSequence {
        LevelSequence::from_vec_unchecked(self.levels.clone())
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// `(parent, child)` for every non-root node in preorder; the parent
    /// always has the smaller index.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (p, i)))
            .collect()
    }

    /// The one or two middle nodes of every longest path, found by peeling
    /// leaves layer by layer.
    pub fn centers(&self) -> Vec<usize> {
        centers_of(&self.adjacency)
    }

    /// Degree-one nodes. A single-node tree counts its node as a leaf.
    pub fn leaves(&self) -> Vec<usize> {
        if self.len() == 1 {
            return vec![0];
        }
        (0..self.len()).filter(|&v| self.degree(v) == 1).collect()
    }

    pub fn internal_nodes(&self) -> Vec<usize> {
        if self.len() == 1 {
            return Vec::new();
        }
        (0..self.len()).filter(|&v| self.degree(v) > 1).collect()
    }

    /// True iff deleting every leaf leaves a path (possibly empty).
    pub fn is_caterpillar(&self) -> bool {
        if self.len() <= 2 {
            return true;
        }
        let internal = |v: usize| self.degree(v) > 1;
        (0..self.len())
            .filter(|&v| internal(v))
            .all(|v| self.adjacency[v].iter().filter(|&&w| internal(w)).count() <= 2)
    }

    /// Canonical level sequence of the underlying free tree.
    ///
    /// The tree is rerooted at each center, children are ordered by
    /// non-increasing subtree sequence, and the lexicographically greater of
    /// the (at most two) results is returned.
    pub fn canonicalize(&self) -> LevelSequence {
        canonical_form(&self.adjacency)
    }
}

/// Preorder walk from `root`: `(node, depth, parent)` triples.
fn preorder_from(adj: &[Vec<usize>], root: usize) -> Vec<(usize, usize, Option<usize>)> {
    let mut out = Vec::with_capacity(adj.len());
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![(root, 0usize, None)];
    seen[root] = true;
    while let Some((v, d, p)) = stack.pop() {
        out.push((v, d, p));
        for &w in adj[v].iter().rev() {
            if !seen[w] {
                seen[w] = true;
                stack.push((w, d + 1, Some(v)));
            }
        }
    }
    out
}

pub(crate) fn centers_of(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &leaf in &layer {
            removed[leaf] = true;
        }
        for &leaf in &layer {
            for &w in &adj[leaf] {
                if !removed[w] {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

pub(crate) fn canonical_form(adj: &[Vec<usize>]) -> LevelSequence {
    centers_of(adj)
        .into_iter()
        .map(|c| rooted_canonical(adj, c))
        .max()
        .expect("a tree has at least one center")
}

/// Largest level sequence of the tree rooted at `root`.
fn rooted_canonical(adj: &[Vec<usize>], root: usize) -> LevelSequence {
    fn encode(adj: &[Vec<usize>], v: usize, parent: Option<usize>, depth: usize) -> Vec<usize> {
        let mut children: Vec<Vec<usize>> = adj[v]
            .iter()
            .filter(|&&w| Some(w) != parent)
            .map(|&w| encode(adj, w, Some(v), depth + 1))
            .collect();
        children.sort_unstable_by(|a, b| b.cmp(a));
        let mut out = Vec::with_capacity(1 + children.iter().map(Vec::len).sum::<usize>());
        out.push(depth);
        for c in children {
            out.extend(c);
        }
        out
    }
    LevelSequence::from_vec_unchecked(encode(adj, root, None, 0))
}

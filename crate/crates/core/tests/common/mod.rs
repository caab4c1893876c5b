#![allow(dead_code)]

use harmonious_core::tree::{LevelSequence, Tree};
use rand::Rng;

pub fn tree(levels: &[usize]) -> Tree {
    Tree::from_level_sequence(&LevelSequence::new(levels.to_vec()).unwrap())
}

/// Edges of the labelled tree with Prüfer code `code` on `code.len() + 2` nodes.
pub fn prufer_edges(code: &[usize]) -> Vec<(usize, usize)> {
    let n = code.len() + 2;
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, c));
        degree[leaf] = 0;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Tree {
    if n == 1 {
        return tree(&[0]);
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    Tree::from_edges(n, &prufer_edges(&code)).unwrap()
}

/// Random onto map from `n` nodes to `0..n-1`.
pub fn random_surjective<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let m = (n - 1).max(1);
    let mut labels: Vec<usize> = (0..m).collect();
    labels.push(rng.gen_range(0..m));
    labels.truncate(n);
    labels.shuffle(rng);
    labels
}

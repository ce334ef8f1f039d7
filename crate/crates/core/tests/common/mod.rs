//! Random inputs and independent oracles shared by the integration tests.
#![allow(dead_code)]

use discsent::features::BowVector;
use discsent::r2n2::{classify_relation, R2n2Params, RelationMode};
use discsent::rst::{RelationLabel, RstNode, RstTree};
use rand::seq::SliceRandom;
use rand::Rng;

pub const RELATIONS: [&str; 10] = [
    "elaboration",
    "background",
    "justify",
    "attribution",
    "contrast",
    "concession",
    "antithesis",
    "comparison",
    "problem-solution",
    "consequence-s",
];

pub const WORDS: [&str; 12] = [
    "good", "bad", "plot", "acting", "dull", "great", "the", "movie", "scenery", "awful", "fine", "story",
];

fn label(rng: &mut impl Rng) -> RelationLabel {
    RelationLabel::new(RELATIONS.choose(rng).unwrap()).unwrap()
}

fn text(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(0..5);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Splits `n` into `parts` positive sizes.
fn split(rng: &mut impl Rng, n: usize, parts: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, n - 1, parts - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain([n]) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

fn node(rng: &mut impl Rng, n: usize, max_arity: usize) -> RstNode {
    if n == 1 {
        return RstNode::leaf(0, text(rng));
    }
    if max_arity >= 2 && rng.gen_bool(0.3) {
        let arity = rng.gen_range(2..=max_arity.min(n));
        let nuclei = split(rng, n, arity).into_iter().map(|k| node(rng, k, max_arity)).collect();
        RstNode::multi(label(rng), nuclei)
    } else {
        let sizes = split(rng, n, 2);
        let first = node(rng, sizes[0], max_arity);
        let second = node(rng, sizes[1], max_arity);
        if rng.gen_bool(0.5) {
            RstNode::nuc_sat(label(rng), first, second, true)
        } else {
            RstNode::nuc_sat(label(rng), second, first, false)
        }
    }
}

/// A random valid tree with `n` EDUs and multinuclear arity up to `max_arity`.
pub fn random_tree(rng: &mut impl Rng, n: usize, max_arity: usize) -> RstTree {
    RstTree::renumbered(node(rng, n, max_arity)).unwrap()
}

pub fn random_vectors(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<BowVector> {
    (0..n)
        .map(|_| {
            let k = rng.gen_range(0..4);
            BowVector::from_counts((0..k).map(|_| (rng.gen_range(0..dim), rng.gen_range(1..3))))
        })
        .collect()
}

/// Depth of every EDU read off its root path: one per satellite edge, plus
/// one for leaving a headless multinuclear spine through a later nucleus.
pub fn path_depths(tree: &RstTree) -> Vec<usize> {
    fn walk(node: &RstNode, sats: usize, on_spine: bool, out: &mut Vec<usize>) {
        match node {
            RstNode::Leaf(_) => out.push(sats),
            RstNode::NucSat { nucleus, satellite, nucleus_first, .. } => {
                let sat_first = !nucleus_first;
                if sat_first {
                    walk(satellite, sats + 1, false, out);
                }
                walk(nucleus, sats, on_spine, out);
                if !sat_first {
                    walk(satellite, sats + 1, false, out);
                }
            }
            RstNode::Multi { nuclei, .. } => {
                for (i, n) in nuclei.iter().enumerate() {
                    if i > 0 && on_spine {
                        walk(n, sats + 1, false, out);
                    } else {
                        walk(n, sats, on_spine, out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(tree.root(), 0, true, &mut out);
    out
}

/// Straight recursive reading of the composition rules, no compilation.
pub fn naive_psi(node: &RstNode, p: &R2n2Params, vectors: &[BowVector]) -> f64 {
    match node {
        RstNode::Leaf(edu) => p.theta.dot(&vectors[edu.id - 1]),
        RstNode::NucSat { relation, nucleus, satellite, .. } => {
            let class = classify_relation(relation, p.mode);
            (p.k_n(class) * naive_psi(nucleus, p, vectors) + p.k_s(class) * naive_psi(satellite, p, vectors)).tanh()
        }
        RstNode::Multi { relation, nuclei } => {
            let class = classify_relation(relation, p.mode);
            (p.k_n(class) * nuclei.iter().map(|n| naive_psi(n, p, vectors)).sum::<f64>()).tanh()
        }
    }
}

pub fn naive_psi_doc(tree: &RstTree, p: &R2n2Params, vectors: &[BowVector]) -> f64 {
    let bag: f64 = vectors.iter().map(|v| p.theta.dot(v)).sum();
    p.gamma * bag + naive_psi(tree.root(), p, vectors)
}

pub fn random_params(rng: &mut impl Rng, mode: RelationMode, dim: usize) -> R2n2Params {
    let mut p = discsent::r2n2::init_params(mode, dim, None, rng.gen());
    for &c in mode.classes() {
        p.set_k_n(c, rng.gen_range(-1.5..1.5));
        p.set_k_s(c, rng.gen_range(-1.5..1.5));
    }
    p.gamma = rng.gen_range(-0.5..1.0);
    for t in p.theta.as_mut_slice() {
        *t = rng.gen_range(-1.0..1.0);
    }
    p
}

//! Rhetorical recursive neural network: scalar sentiment composition over
//! the RST tree.
//!
//! ```text
//! leaf i          Ψ_i   = θᵀw_i
//! nucleus-sat i   Ψ_i   = tanh(K_n(r) Ψ_nucleus + K_s(r) Ψ_satellite)
//! multinuclear i  Ψ_i   = tanh(Σ_j K_n(r) Ψ_j)
//! document        Ψ_doc = γ θᵀ(Σ_i w_i) + Ψ_root
//! ```
//!
//! `r` is the relation class of the node: contrastive vs. non-contrastive,
//! or a single shared class when relations are ignored. Training minimizes
//! the hinge loss `max(0, 1 − y Ψ_doc)` by per-document SGD, with gradients
//! from backpropagation through the tree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::{BowVector, WeightVector};
use crate::logreg::TrainError;
use crate::rst::{RelationLabel, RstNode, RstTree};
use crate::Polarity;

/// Relations with their own composition weights in [`RelationMode::WithRelations`].
pub const CONTRASTIVE_RELATIONS: [&str; 7] = [
    "contrast",
    "comparison",
    "antithesis",
    "antithesis-e",
    "consequence-s",
    "concession",
    "problem-solution",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationMode {
    WithRelations,
    NoRelations,
}

impl RelationMode {
    pub fn classes(self) -> &'static [RelationClass] {
        match self {
            RelationMode::WithRelations => &[RelationClass::Contrastive, RelationClass::NonContrastive],
            RelationMode::NoRelations => &[RelationClass::Single],
        }
    }
}

impl fmt::Display for RelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationMode::WithRelations => "with-relations",
            RelationMode::NoRelations => "no-relations",
        })
    }
}

impl FromStr for RelationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "with-relations" => Ok(RelationMode::WithRelations),
            "no-relations" => Ok(RelationMode::NoRelations),
            _ => Err(format!("unknown relation mode '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationClass {
    Contrastive,
    NonContrastive,
    Single,
}

impl RelationClass {
    /// Position of the class's weights in [`R2n2Params`].
    fn slot(self) -> usize {
        match self {
            RelationClass::Contrastive | RelationClass::Single => 0,
            RelationClass::NonContrastive => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationClass::Contrastive => "contrastive",
            RelationClass::NonContrastive => "non-contrastive",
            RelationClass::Single => "single",
        }
    }
}

/// Membership in [`CONTRASTIVE_RELATIONS`]; unknown labels are
/// non-contrastive. Labels are already lowercase.
pub fn classify_relation(label: &RelationLabel, mode: RelationMode) -> RelationClass {
    match mode {
        RelationMode::NoRelations => RelationClass::Single,
        RelationMode::WithRelations => {
            if CONTRASTIVE_RELATIONS.contains(&label.as_str()) {
                RelationClass::Contrastive
            } else {
                RelationClass::NonContrastive
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct R2n2Params {
    pub mode: RelationMode,
    /// K_n per class slot.
    k_n: Vec<f64>,
    /// K_s per class slot.
    k_s: Vec<f64>,
    pub gamma: f64,
    pub theta: WeightVector,
}

impl R2n2Params {
    /// Explicit parameters; `k_n`/`k_s` map every class of `mode`.
    pub fn new(
        mode: RelationMode,
        k_n: &BTreeMap<RelationClass, f64>,
        k_s: &BTreeMap<RelationClass, f64>,
        gamma: f64,
        theta: WeightVector,
    ) -> Option<R2n2Params> {
        let mut params = R2n2Params {
            mode,
            k_n: vec![0.0; mode.classes().len()],
            k_s: vec![0.0; mode.classes().len()],
            gamma,
            theta,
        };
        for &class in mode.classes() {
            params.k_n[class.slot()] = *k_n.get(&class)?;
            params.k_s[class.slot()] = *k_s.get(&class)?;
        }
        Some(params)
    }

    pub fn k_n(&self, class: RelationClass) -> f64 {
        self.k_n[class.slot()]
    }

    pub fn k_s(&self, class: RelationClass) -> f64 {
        self.k_s[class.slot()]
    }

    pub fn set_k_n(&mut self, class: RelationClass, value: f64) {
        self.k_n[class.slot()] = value;
    }

    pub fn set_k_s(&mut self, class: RelationClass, value: f64) {
        self.k_s[class.slot()] = value;
    }

    pub fn k_n_map(&self) -> BTreeMap<RelationClass, f64> {
        self.mode.classes().iter().map(|&c| (c, self.k_n(c))).collect()
    }

    pub fn k_s_map(&self) -> BTreeMap<RelationClass, f64> {
        self.mode.classes().iter().map(|&c| (c, self.k_s(c))).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.k_n.iter().chain(&self.k_s).all(|v| v.is_finite()) && self.gamma.is_finite() && self.theta.is_finite()
    }

    pub fn predict(&self, tree: &RstTree, edu_vectors: &[BowVector]) -> (f64, Polarity) {
        let psi = forward(tree, self, edu_vectors).psi_doc;
        (psi, Polarity::from_score(psi))
    }

    fn apply(&mut self, grad: &R2n2Gradient, lr: f64, train_theta: bool) {
        for (k, g) in self.k_n.iter_mut().zip(&grad.k_n) {
            *k -= lr * g;
        }
        for (k, g) in self.k_s.iter_mut().zip(&grad.k_s) {
            *k -= lr * g;
        }
        self.gamma -= lr * grad.gamma;
        if train_theta {
            let theta = self.theta.as_mut_slice();
            for &(j, g) in &grad.theta {
                theta[j] -= lr * g;
            }
        }
    }
}

/// K_n = 1, K_s = 0.5 for every class, γ = 0.5. θ is `init_theta` if
/// given, otherwise uniform in [−0.01, 0.01] drawn from `seed`.
pub fn init_params(mode: RelationMode, dim: usize, init_theta: Option<WeightVector>, seed: u64) -> R2n2Params {
    let theta = init_theta.unwrap_or_else(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        WeightVector::from_vec((0..dim).map(|_| rng.gen_range(-0.01..=0.01)).collect())
    });
    let classes = mode.classes().len();
    R2n2Params { mode, k_n: vec![1.0; classes], k_s: vec![0.5; classes], gamma: 0.5, theta }
}

/// Tree flattened into post-order, so children precede parents and the
/// root is last.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledTree {
    nodes: Vec<Node>,
    mode: RelationMode,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { edu: usize },
    NucSat { class: RelationClass, nucleus: usize, satellite: usize },
    Multi { class: RelationClass, nuclei: Vec<usize> },
}

impl CompiledTree {
    pub fn new(tree: &RstTree, mode: RelationMode) -> CompiledTree {
        let mut nodes = Vec::with_capacity(tree.root().node_count());
        compile(tree.root(), mode, &mut nodes);
        CompiledTree { nodes, mode }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether node `i` of the post-order is a leaf.
    pub fn is_leaf(&self, i: usize) -> bool {
        matches!(self.nodes[i], Node::Leaf { .. })
    }
}

fn compile(node: &RstNode, mode: RelationMode, nodes: &mut Vec<Node>) -> usize {
    let compiled = match node {
        RstNode::Leaf(edu) => Node::Leaf { edu: edu.id - 1 },
        RstNode::NucSat { relation, nucleus, satellite, .. } => {
            let nucleus = compile(nucleus, mode, nodes);
            let satellite = compile(satellite, mode, nodes);
            Node::NucSat { class: classify_relation(relation, mode), nucleus, satellite }
        }
        RstNode::Multi { relation, nuclei } => {
            let nuclei = nuclei.iter().map(|n| compile(n, mode, nodes)).collect();
            Node::Multi { class: classify_relation(relation, mode), nuclei }
        }
    };
    nodes.push(compiled);
    nodes.len() - 1
}

/// Activations from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    /// Ψ per node, post-order.
    pub node_psi: Vec<f64>,
    /// Ψ of the RST root.
    pub psi_root: f64,
    /// θᵀ(Σ_i w_i).
    pub bag_score: f64,
    pub psi_doc: f64,
}

pub fn forward(tree: &RstTree, params: &R2n2Params, edu_vectors: &[BowVector]) -> Forward {
    forward_compiled(&CompiledTree::new(tree, params.mode), params, edu_vectors)
}

pub fn forward_compiled(tree: &CompiledTree, params: &R2n2Params, edu_vectors: &[BowVector]) -> Forward {
    let mut psi = vec![0.0; tree.nodes.len()];
    for (i, node) in tree.nodes.iter().enumerate() {
        psi[i] = match node {
            Node::Leaf { edu } => params.theta.dot(&edu_vectors[*edu]),
            Node::NucSat { class, nucleus, satellite } => {
                (params.k_n(*class) * psi[*nucleus] + params.k_s(*class) * psi[*satellite]).tanh()
            }
            Node::Multi { class, nuclei } => {
                let k = params.k_n(*class);
                nuclei.iter().map(|&j| k * psi[j]).sum::<f64>().tanh()
            }
        };
    }
    let psi_root = *psi.last().expect("tree has a root");
    let bag_score = params.theta.dot(&BowVector::sum(edu_vectors));
    Forward { node_psi: psi, psi_root, bag_score, psi_doc: params.gamma * bag_score + psi_root }
}

/// `max(0, 1 − y Ψ_doc)`.
pub fn hinge_loss(psi_doc: f64, label: Polarity) -> f64 {
    (1.0 - label.sign() * psi_doc).max(0.0)
}

/// Gradient of the hinge loss for one document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct R2n2Gradient {
    /// Per class slot, as in [`R2n2Params`].
    pub k_n: Vec<f64>,
    pub k_s: Vec<f64>,
    pub gamma: f64,
    /// Sparse `(index, ∂L/∂θ_j)`, sorted by index.
    pub theta: Vec<(usize, f64)>,
}

impl R2n2Gradient {
    fn zeros(mode: RelationMode) -> R2n2Gradient {
        let classes = mode.classes().len();
        R2n2Gradient { k_n: vec![0.0; classes], k_s: vec![0.0; classes], gamma: 0.0, theta: Vec::new() }
    }

    pub fn k_n(&self, class: RelationClass) -> f64 {
        self.k_n[class.slot()]
    }

    pub fn k_s(&self, class: RelationClass) -> f64 {
        self.k_s[class.slot()]
    }

    pub fn theta_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(j, g) in &self.theta {
            out[j] += g;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.k_n.iter().chain(&self.k_s).all(|&g| g == 0.0)
            && self.gamma == 0.0
            && self.theta.iter().all(|&(_, g)| g == 0.0)
    }
}

pub fn backward(tree: &RstTree, params: &R2n2Params, edu_vectors: &[BowVector], label: Polarity) -> R2n2Gradient {
    let compiled = CompiledTree::new(tree, params.mode);
    let fwd = forward_compiled(&compiled, params, edu_vectors);
    backward_compiled(&compiled, params, edu_vectors, label, &fwd)
}

/// Backpropagation through the tree. At the hinge kink (`y Ψ_doc = 1`) the
/// zero subgradient is used.
pub fn backward_compiled(
    tree: &CompiledTree,
    params: &R2n2Params,
    edu_vectors: &[BowVector],
    label: Polarity,
    fwd: &Forward,
) -> R2n2Gradient {
    let mut grad = R2n2Gradient::zeros(params.mode);
    let y = label.sign();
    if y * fwd.psi_doc >= 1.0 {
        return grad;
    }
    let d_doc = -y;
    grad.gamma = d_doc * fwd.bag_score;

    let mut theta: BTreeMap<usize, f64> = BTreeMap::new();
    for v in edu_vectors {
        for &(j, c) in v.entries() {
            *theta.entry(j).or_default() += d_doc * params.gamma * c as f64;
        }
    }

    let mut adj = vec![0.0; tree.nodes.len()];
    *adj.last_mut().expect("tree has a root") = d_doc;
    for (i, node) in tree.nodes.iter().enumerate().rev() {
        let a = adj[i];
        if a == 0.0 {
            continue;
        }
        match node {
            Node::Leaf { edu } => {
                for &(j, c) in edu_vectors[*edu].entries() {
                    *theta.entry(j).or_default() += a * c as f64;
                }
            }
            Node::NucSat { class, nucleus, satellite } => {
                let psi = fwd.node_psi[i];
                let dz = a * (1.0 - psi * psi);
                let slot = class.slot();
                grad.k_n[slot] += dz * fwd.node_psi[*nucleus];
                grad.k_s[slot] += dz * fwd.node_psi[*satellite];
                adj[*nucleus] += dz * params.k_n[slot];
                adj[*satellite] += dz * params.k_s[slot];
            }
            Node::Multi { class, nuclei } => {
                let psi = fwd.node_psi[i];
                let dz = a * (1.0 - psi * psi);
                let slot = class.slot();
                grad.k_n[slot] += dz * nuclei.iter().map(|&j| fwd.node_psi[j]).sum::<f64>();
                for &j in nuclei {
                    adj[j] += dz * params.k_n[slot];
                }
            }
        }
    }
    grad.theta = theta.into_iter().collect();
    grad
}

/// One training document.
#[derive(Debug, Clone)]
pub struct R2n2Example {
    pub tree: RstTree,
    pub edu_vectors: Vec<BowVector>,
    pub label: Polarity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct R2n2Config {
    pub lr: f64,
    pub epochs: usize,
    pub patience: usize,
    /// Fraction held out for early stopping; 0 disables it.
    pub heldout_fraction: f64,
    pub seed: u64,
    /// Whether θ is updated along with K and γ.
    pub train_theta: bool,
}

impl Default for R2n2Config {
    fn default() -> Self {
        R2n2Config { lr: 0.01, epochs: 30, patience: 5, heldout_fraction: 0.1, seed: 0, train_theta: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub heldout_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct R2n2Training {
    pub params: R2n2Params,
    /// Epoch (1-based) whose parameters were kept.
    pub best_epoch: usize,
    pub heldout_accuracy: Option<f64>,
    pub history: Vec<EpochStats>,
}

struct Prepared<'a> {
    tree: CompiledTree,
    example: &'a R2n2Example,
}

/// One SGD pass over `examples` in a seeded order. Returns the loss of each
/// document measured just before its update.
pub fn train_epoch(
    params: &mut R2n2Params,
    examples: &[R2n2Example],
    config: &R2n2Config,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, TrainError> {
    let prepared: Vec<Prepared> =
        examples.iter().map(|e| Prepared { tree: CompiledTree::new(&e.tree, params.mode), example: e }).collect();
    run_epoch(params, &prepared, config, rng)
}

fn run_epoch(
    params: &mut R2n2Params,
    docs: &[Prepared],
    config: &R2n2Config,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, TrainError> {
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(rng);
    let mut losses = Vec::with_capacity(docs.len());
    for i in order {
        let doc = &docs[i];
        let fwd = forward_compiled(&doc.tree, params, &doc.example.edu_vectors);
        let loss = hinge_loss(fwd.psi_doc, doc.example.label);
        if !loss.is_finite() {
            return Err(TrainError::NonFinite(format!("hinge loss {loss}")));
        }
        losses.push(loss);
        let grad = backward_compiled(&doc.tree, params, &doc.example.edu_vectors, doc.example.label, &fwd);
        params.apply(&grad, config.lr, config.train_theta);
    }
    if !params.is_finite() {
        return Err(TrainError::NonFinite("network parameters".into()));
    }
    Ok(losses)
}

fn accuracy(params: &R2n2Params, docs: &[Prepared]) -> f64 {
    let correct = docs
        .iter()
        .filter(|d| {
            Polarity::from_score(forward_compiled(&d.tree, params, &d.example.edu_vectors).psi_doc) == d.example.label
        })
        .count();
    correct as f64 / docs.len().max(1) as f64
}

/// Per-document SGD from `init`. With a held-out split, training stops once
/// held-out accuracy has not improved for `patience` epochs and the best
/// epoch's parameters are returned; otherwise the last epoch's are.
pub fn train_r2n2(
    examples: &[R2n2Example],
    init: R2n2Params,
    config: &R2n2Config,
) -> Result<R2n2Training, TrainError> {
    if examples.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let has = |p: Polarity| examples.iter().any(|e| e.label == p);
    if !has(Polarity::Positive) || !has(Polarity::Negative) {
        return Err(TrainError::SingleClass);
    }
    if !(config.lr.is_finite() && config.lr >= 0.0) {
        return Err(TrainError::InvalidConfig(format!("learning rate {} must be non-negative", config.lr)));
    }
    if !(0.0..=0.5).contains(&config.heldout_fraction) {
        return Err(TrainError::InvalidConfig(format!(
            "held-out fraction {} must be in [0, 0.5]",
            config.heldout_fraction
        )));
    }
    if let Some(max) = examples.iter().flat_map(|e| &e.edu_vectors).filter_map(|v| v.entries().last()).map(|e| e.0).max() {
        if max >= init.theta.len() {
            return Err(TrainError::InvalidConfig(format!(
                "feature index {max} out of range for dimension {}",
                init.theta.len()
            )));
        }
    }
    if let Some(e) = examples.iter().find(|e| e.edu_vectors.len() != e.tree.edu_count()) {
        return Err(TrainError::InvalidConfig(format!(
            "{} EDU vectors for a tree with {} EDUs",
            e.edu_vectors.len(),
            e.tree.edu_count()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut rng);
    let n_held = (examples.len() as f64 * config.heldout_fraction).floor() as usize;
    let n_held = n_held.min(examples.len() - 1);
    let prepare = |i: &usize| Prepared { tree: CompiledTree::new(&examples[*i].tree, init.mode), example: &examples[*i] };
    let heldout: Vec<Prepared> = order[..n_held].iter().map(prepare).collect();
    let train: Vec<Prepared> = order[n_held..].iter().map(prepare).collect();

    let mut params = init;
    let mut best: Option<(f64, usize, R2n2Params)> = None;
    let mut since_best = 0;
    let mut history = Vec::new();
    for epoch in 1..=config.epochs {
        let losses = run_epoch(&mut params, &train, config, &mut rng)?;
        let mean_loss = losses.iter().sum::<f64>() / losses.len().max(1) as f64;
        let heldout_accuracy = (!heldout.is_empty()).then(|| accuracy(&params, &heldout));
        history.push(EpochStats { epoch, mean_loss, heldout_accuracy });
        let Some(acc) = heldout_accuracy else { continue };
        if best.as_ref().is_none_or(|(best_acc, _, _)| acc > *best_acc) {
            best = Some((acc, epoch, params.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }
    Ok(match best {
        Some((acc, epoch, best_params)) => R2n2Training {
            params: best_params,
            best_epoch: epoch,
            heldout_accuracy: Some(acc),
            history,
        },
        None => R2n2Training { best_epoch: history.len(), params, heldout_accuracy: None, history },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rst::parse_rst_str;

    fn bow(pairs: &[(usize, u32)]) -> BowVector {
        BowVector::from_counts(pairs.iter().copied())
    }

    fn rel(name: &str) -> RelationLabel {
        RelationLabel::new(name).unwrap()
    }

    #[test]
    fn contrastive_set() {
        let m = RelationMode::WithRelations;
        assert_eq!(classify_relation(&rel("concession"), m), RelationClass::Contrastive);
        assert_eq!(classify_relation(&rel("Antithesis-E"), m), RelationClass::Contrastive);
        assert_eq!(classify_relation(&rel("elaboration"), m), RelationClass::NonContrastive);
        assert_eq!(classify_relation(&rel("made-up"), m), RelationClass::NonContrastive);
        for name in CONTRASTIVE_RELATIONS {
            assert_eq!(classify_relation(&rel(name), m), RelationClass::Contrastive);
            assert_eq!(classify_relation(&rel(name), RelationMode::NoRelations), RelationClass::Single);
        }
    }

    #[test]
    fn init_defaults() {
        let p = init_params(RelationMode::NoRelations, 4, None, 1);
        assert_eq!(p.k_n_map(), BTreeMap::from([(RelationClass::Single, 1.0)]));
        assert_eq!(p.k_s_map(), BTreeMap::from([(RelationClass::Single, 0.5)]));
        assert_eq!(p.gamma, 0.5);
        assert!(p.theta.as_slice().iter().all(|t| t.abs() <= 0.01));
        assert_eq!(p, init_params(RelationMode::NoRelations, 4, None, 1));

        let q = init_params(RelationMode::WithRelations, 4, None, 1);
        for c in [RelationClass::Contrastive, RelationClass::NonContrastive] {
            assert_eq!((q.k_n(c), q.k_s(c)), (1.0, 0.5));
        }

        let theta = WeightVector::from_vec(vec![0.1, -0.30000000000000004, 7.0]);
        let r = init_params(RelationMode::WithRelations, 3, Some(theta.clone()), 1);
        assert_eq!(r.theta.as_slice().iter().map(|t| t.to_bits()).collect::<Vec<_>>(),
                   theta.as_slice().iter().map(|t| t.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn single_edu_forward() {
        let tree = parse_rst_str(r#"(edu 1 "x")"#).unwrap();
        let mut p = init_params(RelationMode::NoRelations, 1, Some(WeightVector::from_vec(vec![0.3])), 0);
        p.gamma = 0.5;
        let f = forward(&tree, &p, &[bow(&[(0, 1)])]);
        assert_eq!(f.psi_root, 0.3);
        assert!((f.psi_doc - 0.45).abs() < 1e-15);
    }

    #[test]
    fn satellite_nulled() {
        let tree = parse_rst_str(r#"(ns elaboration (n (edu 1 "a")) (s (edu 2 "b")))"#).unwrap();
        let mut p = init_params(RelationMode::NoRelations, 2, Some(WeightVector::from_vec(vec![0.5, -9.0])), 0);
        p.set_k_n(RelationClass::Single, 1.0);
        p.set_k_s(RelationClass::Single, 0.0);
        let f = forward(&tree, &p, &[bow(&[(0, 1)]), bow(&[(1, 1)])]);
        assert!((f.psi_root - 0.462117).abs() < 1e-6);
        assert_eq!(f.psi_root, 0.5f64.tanh());
    }

    #[test]
    fn elaboration_unit_in_worked_example() {
        // Unit 1B+1C: tanh(K_n Ψ_1B + K_s Ψ_1C) with the non-contrastive weights.
        let tree = crate::samples::last_samurai_tree();
        let mut p = init_params(RelationMode::WithRelations, 8, None, 0);
        p.theta = WeightVector::from_vec((0..8).map(|i| 0.1 * (i as f64 + 1.0)).collect());
        p.set_k_n(RelationClass::NonContrastive, 1.3);
        p.set_k_s(RelationClass::NonContrastive, -0.4);
        let vectors: Vec<BowVector> = (0..8).map(|i| bow(&[(i, 1)])).collect();
        let compiled = CompiledTree::new(&tree, p.mode);
        let f = forward_compiled(&compiled, &p, &vectors);
        // Post-order visits nuclei first: e8, e1, e2, e3, (e2 e3), ...
        assert!(compiled.is_leaf(3) && !compiled.is_leaf(4));
        assert_eq!(f.node_psi[4], (1.3 * f.node_psi[2] + -0.4 * f.node_psi[3]).tanh());
        assert!((f.node_psi[4] - (1.3f64 * 0.2 - 0.4 * 0.3).tanh()).abs() < 1e-15);
    }

    #[test]
    fn inactive_hinge_has_zero_gradient() {
        let tree = parse_rst_str(r#"(edu 1 "x")"#).unwrap();
        let p = init_params(RelationMode::NoRelations, 1, Some(WeightVector::from_vec(vec![4.0 / 3.0])), 0);
        // Ψ_doc = 0.5·(4/3) + 4/3 = 2.
        let g = backward(&tree, &p, &[bow(&[(0, 1)])], Polarity::Positive);
        assert!(g.is_zero());
    }

    #[test]
    fn single_edu_closed_form_gradient() {
        let tree = parse_rst_str(r#"(edu 1 "x")"#).unwrap();
        let mut p = init_params(RelationMode::NoRelations, 3, Some(WeightVector::from_vec(vec![0.1, -0.2, 0.05])), 0);
        p.gamma = 0.7;
        let w = bow(&[(0, 2), (2, 3)]);
        let score = p.theta.dot(&w);
        let g = backward(&tree, &p, std::slice::from_ref(&w), Polarity::Positive);
        assert_eq!(g.gamma, -score);
        assert_eq!(g.theta, vec![(0, -(0.7 + 1.0) * 2.0), (2, -(0.7 + 1.0) * 3.0)]);
        assert_eq!(g.k_n(RelationClass::Single), 0.0);
    }

    #[test]
    fn lr_zero_keeps_params() {
        let tree = parse_rst_str(r#"(ns elaboration (n (edu 1 "a")) (s (edu 2 "b")))"#).unwrap();
        let examples: Vec<R2n2Example> = (0..10)
            .map(|i| R2n2Example {
                tree: tree.clone(),
                edu_vectors: vec![bow(&[(i % 2, 1)]), bow(&[(1 - i % 2, 2)])],
                label: if i % 2 == 0 { Polarity::Positive } else { Polarity::Negative },
            })
            .collect();
        let init = init_params(RelationMode::WithRelations, 2, None, 3);
        let cfg = R2n2Config { lr: 0.0, epochs: 3, ..Default::default() };
        let trained = train_r2n2(&examples, init.clone(), &cfg).unwrap();
        assert_eq!(trained.params, init);
    }

    #[test]
    fn trainer_contract_errors() {
        let tree = parse_rst_str(r#"(edu 1 "a")"#).unwrap();
        let one = R2n2Example { tree, edu_vectors: vec![bow(&[(0, 1)])], label: Polarity::Positive };
        let init = init_params(RelationMode::NoRelations, 1, None, 0);
        let cfg = R2n2Config::default();
        assert_eq!(train_r2n2(&[], init.clone(), &cfg), Err(TrainError::EmptyCorpus));
        assert_eq!(train_r2n2(&[one.clone(), one], init, &cfg), Err(TrainError::SingleClass));
    }

    #[test]
    fn hinge_values() {
        assert_eq!(hinge_loss(2.0, Polarity::Positive), 0.0);
        assert_eq!(hinge_loss(1.0, Polarity::Positive), 0.0);
        assert_eq!(hinge_loss(0.25, Polarity::Positive), 0.75);
        assert_eq!(hinge_loss(0.25, Polarity::Negative), 1.25);
    }
}

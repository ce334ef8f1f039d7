//! Synthetic review corpora whose polarity is carried by the document's
//! head unit while the satellites argue the opposite.
//!
//! Every document starts from a head EDU holding one or two words of the
//! document's polarity. Satellites are wrapped around it one at a time
//! (leaves, two-unit elaborations, or small multinuclear lists), and mostly
//! contain words of the opposite polarity. Head and satellite words are
//! drawn from the same pools, so word identity alone carries no position
//! information; only the discourse structure separates them.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Document;
use crate::rst::{RelationLabel, RstNode, RstTree};
use crate::Polarity;

const RELATIONS: [&str; 12] = [
    "elaboration",
    "background",
    "justify",
    "evidence",
    "explanation",
    "circumstance",
    "concession",
    "contrast",
    "antithesis",
    "comparison",
    "condition",
    "attribution",
];

const LIST_RELATIONS: [&str; 3] = ["conjunction", "list", "joint"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub docs: usize,
    pub seed: u64,
    /// Sentiment words per polarity.
    pub polar_words: usize,
    pub filler_words: usize,
    pub min_satellites: usize,
    pub max_satellites: usize,
    /// Chance that a satellite EDU carries one opposite-polarity word.
    pub adversarial_rate: f64,
    /// Chance that a satellite EDU carries one same-polarity word.
    pub supporting_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs: 2000,
            seed: 0,
            polar_words: 40,
            filler_words: 300,
            min_satellites: 2,
            max_satellites: 5,
            adversarial_rate: 0.6,
            supporting_rate: 0.15,
        }
    }
}

fn positive_word(i: usize) -> String {
    format!("pos{i:03}")
}

fn negative_word(i: usize) -> String {
    format!("neg{i:03}")
}

fn filler_word(i: usize) -> String {
    format!("w{i:04}")
}

/// Polarity lexicon covering every sentiment word the generator uses.
pub fn lexicon(config: &SynthConfig) -> BTreeMap<String, Polarity> {
    (0..config.polar_words)
        .flat_map(|i| [(positive_word(i), Polarity::Positive), (negative_word(i), Polarity::Negative)])
        .collect()
}

struct Generator<'a> {
    config: &'a SynthConfig,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn polar(&mut self, polarity: Polarity) -> String {
        let i = self.rng.gen_range(0..self.config.polar_words);
        match polarity {
            Polarity::Positive => positive_word(i),
            Polarity::Negative => negative_word(i),
        }
    }

    fn text(&mut self, polar: Vec<String>) -> String {
        let fillers = self.rng.gen_range(3..=7);
        let mut words: Vec<String> =
            (0..fillers).map(|_| filler_word(self.rng.gen_range(0..self.config.filler_words))).collect();
        words.extend(polar);
        words.shuffle(&mut self.rng);
        let mut text = words.join(" ");
        text.push('.');
        text
    }

    fn satellite_edu(&mut self, label: Polarity) -> RstNode {
        let mut polar = Vec::new();
        if self.rng.gen_bool(self.config.adversarial_rate) {
            polar.push(self.polar(label.flipped()));
        }
        if self.rng.gen_bool(self.config.supporting_rate) {
            polar.push(self.polar(label));
        }
        RstNode::leaf(0, self.text(polar))
    }

    fn relation(&mut self, names: &[&str]) -> RelationLabel {
        RelationLabel::new(names.choose(&mut self.rng).expect("nonempty")).expect("valid label")
    }

    fn satellite(&mut self, label: Polarity) -> RstNode {
        match self.rng.gen_range(0..4) {
            0 | 1 => self.satellite_edu(label),
            2 => {
                let first = self.rng.gen_bool(0.5);
                let rel = self.relation(&RELATIONS);
                let nucleus = self.satellite_edu(label);
                let satellite = self.satellite_edu(label);
                RstNode::nuc_sat(rel, nucleus, satellite, first)
            }
            _ => {
                let n = self.rng.gen_range(2..=3);
                let rel = self.relation(&LIST_RELATIONS);
                RstNode::multi(rel, (0..n).map(|_| self.satellite_edu(label)).collect())
            }
        }
    }

    fn document(&mut self, index: usize) -> Document {
        let label = if self.rng.gen_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
        let head_words = self.rng.gen_range(1..=2);
        let polar = (0..head_words).map(|_| self.polar(label)).collect();
        let mut node = RstNode::leaf(0, self.text(polar));
        let satellites = self.rng.gen_range(self.config.min_satellites..=self.config.max_satellites);
        for _ in 0..satellites {
            let rel = self.relation(&RELATIONS);
            let sat = self.satellite(label);
            let nucleus_first = self.rng.gen_bool(0.5);
            node = RstNode::nuc_sat(rel, node, sat, nucleus_first);
        }
        let tree = RstTree::renumbered(node).expect("generated trees are valid");
        Document::from_tree(format!("doc{index:05}"), label, tree)
    }
}

pub fn generate(config: &SynthConfig) -> Vec<Document> {
    let mut gen = Generator { config, rng: ChaCha8Rng::seed_from_u64(config.seed) };
    (0..config.docs).map(|i| gen.document(i)).collect()
}

/// Writes `manifest.tsv`, `lexicon.tsv` and `trees/<id>.rst.sexp` under
/// `dir`. Manifest paths are relative to `dir`.
pub fn write_corpus(dir: &Path, docs: &[Document], lexicon: &BTreeMap<String, Polarity>) -> io::Result<()> {
    fs::create_dir_all(dir.join("trees"))?;
    let mut manifest = String::new();
    for doc in docs {
        let tree = doc.tree.as_ref().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "document without tree"))?;
        let rel = format!("trees/{}.rst.sexp", doc.id);
        fs::write(dir.join(&rel), tree.to_sexp())?;
        manifest.push_str(&format!("{}\tlabel:{}\t{}\t-\n", doc.id, doc.label, rel));
    }
    fs::write(dir.join("manifest.tsv"), manifest)?;
    let mut lex = String::new();
    for (word, polarity) in lexicon {
        let name = match polarity {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        };
        lex.push_str(&format!("{word}\t{name}\n"));
    }
    fs::write(dir.join("lexicon.tsv"), lex)
}

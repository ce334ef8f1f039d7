//! Versioned JSON model files shared by the logistic-regression and
//! recursive-network trainers.
//!
//! Every file carries `format`, `version`, the vocabulary listing with its
//! SHA-256 fingerprint, and dense θ. Logistic-regression models add `bias`
//! and `reg`; recursive-network models add an `r2n2` section with the
//! composition weights, γ and the relation mode.

use std::collections::BTreeMap;
use std::fmt;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{Vocabulary, WeightVector};
use crate::r2n2::{R2n2Params, RelationClass, RelationMode};

pub const FORMAT: &str = "discsent-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("not a model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unexpected format tag '{0}'")]
    Format(String),
    #[error("unsupported model version {0} (this build reads version {VERSION})")]
    Version(u32),
    #[error("vocabulary fingerprint mismatch: file says {stored}, listing hashes to {computed}")]
    VocabHash { stored: String, computed: String },
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
}

/// How documents are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// θᵀ(Σ w_i)
    Flat,
    /// Σ λ_i θᵀw_i with DEP-DT depth weights
    Depth,
    /// Recursive composition over the RST tree
    R2n2,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Flat => "flat",
            Mode::Depth => "depth",
            Mode::R2n2 => "r2n2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logreg,
    R2n2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R2n2Section {
    pub relations: String,
    pub k_n: BTreeMap<String, f64>,
    pub k_s: BTreeMap<String, f64>,
    pub gamma: f64,
    pub lr: f64,
    pub epochs: usize,
    pub patience: usize,
    pub train_theta: bool,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    /// Scoring mode used when none is requested.
    pub mode: Mode,
    /// Whether training features were depth-weighted.
    pub weight_train: bool,
    pub seed: u64,
    pub min_count: usize,
    pub heldout_accuracy: Option<f64>,
    pub vocab_hash: String,
    pub vocab: Vec<String>,
    pub theta: Vec<f64>,
    pub bias: f64,
    pub reg: Option<f64>,
    pub r2n2: Option<R2n2Section>,
}

impl ModelFile {
    /// A logistic-regression (or fixed linear) model.
    pub fn linear(vocab: &Vocabulary, theta: &WeightVector, bias: f64, reg: Option<f64>, mode: Mode) -> ModelFile {
        ModelFile {
            format: FORMAT.to_string(),
            version: VERSION,
            kind: ModelKind::Logreg,
            mode,
            weight_train: false,
            seed: 0,
            min_count: 1,
            heldout_accuracy: None,
            vocab_hash: vocab.fingerprint(),
            vocab: vocab.tokens().to_vec(),
            theta: theta.as_slice().to_vec(),
            bias,
            reg,
            r2n2: None,
        }
    }

    pub fn recursive(vocab: &Vocabulary, params: &R2n2Params, section: R2n2Section) -> ModelFile {
        let mut file = ModelFile::linear(vocab, &params.theta, 0.0, None, Mode::R2n2);
        file.kind = ModelKind::R2n2;
        file.r2n2 = Some(section);
        file
    }

    /// K maps and γ from `params`, training settings as given.
    pub fn r2n2_section(params: &R2n2Params, lr: f64, epochs: usize, patience: usize, train_theta: bool, best_epoch: usize) -> R2n2Section {
        let names = |m: BTreeMap<RelationClass, f64>| m.into_iter().map(|(c, v)| (c.name().to_string(), v)).collect();
        R2n2Section {
            relations: params.mode.to_string(),
            k_n: names(params.k_n_map()),
            k_s: names(params.k_s_map()),
            gamma: params.gamma,
            lr,
            epochs,
            patience,
            train_theta,
            best_epoch,
        }
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        if !(self.theta.iter().all(|v| v.is_finite()) && self.bias.is_finite()) {
            return Err(ModelError::Inconsistent("non-finite weights".into()));
        }
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and checks a model file.
    pub fn from_json(text: &str) -> Result<ModelFile, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != FORMAT {
            return Err(ModelError::Format(file.format));
        }
        if file.version != VERSION {
            return Err(ModelError::Version(file.version));
        }
        let computed = file.vocabulary()?.fingerprint();
        if computed != file.vocab_hash {
            return Err(ModelError::VocabHash { stored: file.vocab_hash, computed });
        }
        if file.theta.len() != file.vocab.len() {
            return Err(ModelError::Inconsistent(format!(
                "{} weights for {} vocabulary entries",
                file.theta.len(),
                file.vocab.len()
            )));
        }
        match (file.kind, &file.r2n2) {
            (ModelKind::R2n2, None) => return Err(ModelError::Inconsistent("missing r2n2 section".into())),
            (ModelKind::Logreg, Some(_)) => return Err(ModelError::Inconsistent("unexpected r2n2 section".into())),
            (ModelKind::Logreg, None) if file.mode == Mode::R2n2 => {
                return Err(ModelError::Inconsistent("linear model cannot default to r2n2 scoring".into()))
            }
            _ => {}
        }
        if file.kind == ModelKind::R2n2 {
            file.r2n2_params()?;
        }
        Ok(file)
    }

    pub fn vocabulary(&self) -> Result<Vocabulary, ModelError> {
        Vocabulary::from_tokens(self.vocab.iter().cloned()).map_err(|e| ModelError::Inconsistent(e.to_string()))
    }

    pub fn theta(&self) -> WeightVector {
        WeightVector::from_vec(self.theta.clone())
    }

    pub fn r2n2_params(&self) -> Result<R2n2Params, ModelError> {
        let section = self.r2n2.as_ref().ok_or_else(|| ModelError::Inconsistent("not an r2n2 model".into()))?;
        let mode: RelationMode = section.relations.parse().map_err(ModelError::Inconsistent)?;
        let lookup = |m: &BTreeMap<String, f64>| -> BTreeMap<RelationClass, f64> {
            mode.classes().iter().filter_map(|&c| m.get(c.name()).map(|&v| (c, v))).collect()
        };
        R2n2Params::new(mode, &lookup(&section.k_n), &lookup(&section.k_s), section.gamma, self.theta())
            .filter(|p| p.is_finite())
            .ok_or_else(|| ModelError::Inconsistent(format!("composition weights incomplete for {mode}")))
    }
}

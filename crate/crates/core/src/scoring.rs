//! Linear document scoring: flat bag-of-words and discourse-depth
//! reweighting.

use thiserror::Error;

use crate::features::{BowVector, WeightVector};
use crate::Polarity;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoringError {
    #[error("no depth for EDU {edu}")]
    MissingDepth { edu: usize },
    #[error("{depths} depths given for {edus} EDUs")]
    DepthCountMismatch { edus: usize, depths: usize },
}

/// `max(0.5, 1 − d/6)`.
pub fn depth_weight(depth: usize) -> f64 {
    (1.0 - depth as f64 / 6.0).max(0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EduScore {
    pub edu: usize,
    /// θᵀw_i.
    pub psi: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocScore {
    pub psi: f64,
    pub label: Polarity,
    pub edus: Vec<EduScore>,
}

/// Weights plus an additive offset; lexicon scoring uses a zero bias.
#[derive(Debug, Clone, Copy)]
pub struct LinearScorer<'a> {
    pub theta: &'a WeightVector,
    pub bias: f64,
}

impl<'a> LinearScorer<'a> {
    pub fn new(theta: &'a WeightVector, bias: f64) -> LinearScorer<'a> {
        LinearScorer { theta, bias }
    }

    /// `Ψ = θᵀ(Σ_i w_i) + b`.
    pub fn flat(&self, edu_vectors: &[BowVector]) -> DocScore {
        let psi = self.theta.dot(&BowVector::sum(edu_vectors)) + self.bias;
        let edus = edu_vectors
            .iter()
            .enumerate()
            .map(|(i, w)| EduScore { edu: i + 1, psi: self.theta.dot(w), lambda: 1.0 })
            .collect();
        DocScore { psi, label: Polarity::from_score(psi), edus }
    }

    /// `Ψ = Σ_i λ_i θᵀw_i + b`, with `depths` indexed by EDU id − 1.
    pub fn depth_weighted(&self, edu_vectors: &[BowVector], depths: &[usize]) -> Result<DocScore, ScoringError> {
        if depths.len() < edu_vectors.len() {
            return Err(ScoringError::MissingDepth { edu: depths.len() + 1 });
        }
        if depths.len() > edu_vectors.len() {
            return Err(ScoringError::DepthCountMismatch { edus: edu_vectors.len(), depths: depths.len() });
        }
        let edus: Vec<EduScore> = edu_vectors
            .iter()
            .zip(depths)
            .enumerate()
            .map(|(i, (w, &d))| EduScore { edu: i + 1, psi: self.theta.dot(w), lambda: depth_weight(d) })
            .collect();
        let psi = edus.iter().map(|e| e.lambda * e.psi).sum::<f64>() + self.bias;
        Ok(DocScore { psi, label: Polarity::from_score(psi), edus })
    }
}

pub fn score_flat(edu_vectors: &[BowVector], theta: &WeightVector) -> DocScore {
    LinearScorer::new(theta, 0.0).flat(edu_vectors)
}

pub fn score_depth_weighted(
    edu_vectors: &[BowVector],
    depths: &[usize],
    theta: &WeightVector,
) -> Result<DocScore, ScoringError> {
    LinearScorer::new(theta, 0.0).depth_weighted(edu_vectors, depths)
}

/// Per-EDU weights λ_i for a depth map.
pub fn depth_weights(depths: &[usize]) -> Vec<f64> {
    depths.iter().map(|&d| depth_weight(d)).collect()
}

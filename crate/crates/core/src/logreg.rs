//! L2-regularized binary logistic regression, trained by full-batch gradient
//! descent with backtracking line search.
//!
//! Objective (bias unregularized):
//!
//! ```text
//! J(θ, b) = (1/n) Σ_t log(1 + exp(−y_t (θᵀx_t + b))) + (reg/2) ‖θ‖²
//! ```

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::{FeatureVec, WeightVector};
use crate::Polarity;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyCorpus,
    #[error("training set contains only one class")]
    SingleClass,
    #[error("regularization grid is empty")]
    EmptyRegGrid,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite value during training: {0}")]
    NonFinite(String),
}

/// A labeled feature vector.
pub type Example = (FeatureVec, Polarity);

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegConfig {
    pub reg_grid: Vec<f64>,
    pub heldout_fraction: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            reg_grid: vec![1e-3, 1e-2, 1e-1, 1.0],
            heldout_fraction: 0.1,
            seed: 0,
            tolerance: 1e-6,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub theta: WeightVector,
    pub bias: f64,
    pub reg_coef: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting at the initial point.
    pub objective_history: Vec<f64>,
    /// Held-out accuracy of the selected regularization coefficient.
    pub heldout_accuracy: Option<f64>,
}

impl LogRegModel {
    pub fn zeros(dim: usize, reg_coef: f64) -> LogRegModel {
        LogRegModel {
            theta: WeightVector::zeros(dim),
            bias: 0.0,
            reg_coef,
            iterations: 0,
            converged: false,
            objective_history: Vec::new(),
            heldout_accuracy: None,
        }
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objective_history.last().copied()
    }

    pub fn margin(&self, x: &FeatureVec) -> f64 {
        x.dot(self.theta.as_slice()) + self.bias
    }

    pub fn predict(&self, x: &FeatureVec) -> Polarity {
        Polarity::from_score(self.margin(x))
    }

    pub fn accuracy(&self, docs: &[Example]) -> f64 {
        if docs.is_empty() {
            return 0.0;
        }
        let correct = docs.iter().filter(|(x, y)| self.predict(x) == *y).count();
        correct as f64 / docs.len() as f64
    }

    pub fn objective(&self, docs: &[Example]) -> f64 {
        objective(self.theta.as_slice(), self.bias, self.reg_coef, docs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegGradient {
    pub theta: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn objective(theta: &[f64], bias: f64, reg: f64, docs: &[Example]) -> f64 {
    let n = docs.len().max(1) as f64;
    let loss: f64 = docs.iter().map(|(x, y)| softplus(-y.sign() * (x.dot(theta) + bias))).sum();
    loss / n + 0.5 * reg * theta.iter().map(|t| t * t).sum::<f64>()
}

fn gradient(theta: &[f64], bias: f64, reg: f64, docs: &[Example]) -> LogRegGradient {
    let n = docs.len().max(1) as f64;
    let mut g = theta.iter().map(|t| reg * t).collect::<Vec<_>>();
    let mut g_bias = 0.0;
    for (x, y) in docs {
        let y = y.sign();
        let coef = -y * sigmoid(-y * (x.dot(theta) + bias)) / n;
        for &(j, v) in x.entries() {
            g[j] += coef * v;
        }
        g_bias += coef;
    }
    LogRegGradient { theta: g, bias: g_bias }
}

/// Analytic gradient of the objective at the model's parameters.
pub fn logreg_gradient(model: &LogRegModel, docs: &[Example]) -> LogRegGradient {
    gradient(model.theta.as_slice(), model.bias, model.reg_coef, docs)
}

/// Fits a single regularization coefficient from θ = 0, b = 0.
pub fn fit(docs: &[Example], dim: usize, reg: f64, tolerance: f64, max_iterations: usize) -> LogRegModel {
    let mut theta = vec![0.0; dim];
    let mut bias = 0.0;
    let mut f = objective(&theta, bias, reg, docs);
    let mut history = vec![f];
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        let g = gradient(&theta, bias, reg, docs);
        let g_sq = g.theta.iter().map(|v| v * v).sum::<f64>() + g.bias * g.bias;
        if g_sq.sqrt() <= tolerance {
            converged = true;
            break;
        }
        step = (step * 2.0).min(1e6);
        let accepted = loop {
            let cand_theta: Vec<f64> = theta.iter().zip(&g.theta).map(|(t, d)| t - step * d).collect();
            let cand_bias = bias - step * g.bias;
            let cand_f = objective(&cand_theta, cand_bias, reg, docs);
            // Armijo sufficient decrease.
            if cand_f <= f - 0.5 * step * g_sq {
                break Some((cand_theta, cand_bias, cand_f));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((t, b, cand_f)) = accepted else { break };
        theta = t;
        bias = b;
        f = cand_f;
        history.push(f);
        iterations += 1;
    }
    LogRegModel {
        theta: WeightVector::from_vec(theta),
        bias,
        reg_coef: reg,
        iterations,
        converged,
        objective_history: history,
        heldout_accuracy: None,
    }
}

/// Picks the regularization coefficient with the best held-out accuracy
/// (ties go to the larger coefficient), then refits on all documents.
pub fn train_logreg(docs: &[Example], dim: usize, config: &LogRegConfig) -> Result<LogRegModel, TrainError> {
    if docs.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let has = |p: Polarity| docs.iter().any(|(_, y)| *y == p);
    if !has(Polarity::Positive) || !has(Polarity::Negative) {
        return Err(TrainError::SingleClass);
    }
    if config.reg_grid.is_empty() {
        return Err(TrainError::EmptyRegGrid);
    }
    if let Some(bad) = config.reg_grid.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(TrainError::InvalidConfig(format!("regularization coefficient {bad} must be positive")));
    }
    if !(config.heldout_fraction > 0.0 && config.heldout_fraction <= 0.5) {
        return Err(TrainError::InvalidConfig(format!(
            "held-out fraction {} must be in (0, 0.5]",
            config.heldout_fraction
        )));
    }
    if let Some(max) = docs.iter().filter_map(|(x, _)| x.max_index()).max() {
        if max >= dim {
            return Err(TrainError::InvalidConfig(format!("feature index {max} out of range for dimension {dim}")));
        }
    }

    let (train, heldout) = split_heldout(docs, config.heldout_fraction, config.seed);
    let mut best: Option<(f64, f64)> = None;
    for &reg in &config.reg_grid {
        let model = fit(&train, dim, reg, config.tolerance, config.max_iterations);
        let acc = model.accuracy(&heldout);
        best = match best {
            Some((best_acc, best_reg)) if acc < best_acc || (acc == best_acc && reg <= best_reg) => {
                Some((best_acc, best_reg))
            }
            _ => Some((acc, reg)),
        };
    }
    let (heldout_accuracy, reg) = best.expect("grid is nonempty");
    let mut model = fit(docs, dim, reg, config.tolerance, config.max_iterations);
    if !(model.theta.is_finite() && model.bias.is_finite()) {
        return Err(TrainError::NonFinite("logistic regression parameters".into()));
    }
    model.heldout_accuracy = Some(heldout_accuracy);
    Ok(model)
}

/// Seeded shuffle, then the first ⌊n·fraction⌋ documents (at least one, at
/// most n − 1) are held out.
pub fn split_heldout<T: Clone>(docs: &[T], fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let n = docs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_held = ((n as f64 * fraction).floor() as usize).clamp(1.min(n), n.saturating_sub(1));
    let heldout = order[..n_held].iter().map(|&i| docs[i].clone()).collect();
    let train = order[n_held..].iter().map(|&i| docs[i].clone()).collect();
    (train, heldout)
}
